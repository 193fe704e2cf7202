//! Subcommand implementations. Each returns the report text and the
//! overall verdict.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use qfisher::acceptance::reproduce;
use qfisher::diffusion::{debruijn_check, default_log_dt, evolve, phi_monotonicity_check, DiffusionState};
use qfisher::estimation::{crm_bound_quadratic, crm_bound_scalar, mc_error_moment, qcr_product, EstimatorSpec, ModelSpec};
use qfisher::inequalities::{
    max_entropy_fixed_moment, min_fisher_fixed_entropy, min_fisher_fixed_moment, stam_product_exact, stam_ratio,
    BatchSettings, ExtremalReport, GRID_HALF_NODES, GRID_TAIL,
};
use qfisher::info::summarize;
use qfisher::numerics::par::map_range;
use qfisher::perturb::{batch, perturb, window_half_width, Constraint, Direction};
use qfisher::{Axis, DiffusionParams, GridDensity, Norm, QGaussianParams, Tolerances, VerificationReport};

use crate::config::{Params, UsageError};
use crate::density::{Source, KEYS as DENSITY_KEYS};

const TOLERANCE_KEYS: [&str; 3] = ["quadrature_rel", "identity_rel", "inequality_slack"];

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Numerical(qfisher::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<qfisher::Error> for CliError {
    fn from(e: qfisher::Error) -> Self {
        CliError::Numerical(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Rendered report and verdict.
pub struct Report {
    pub body: String,
    pub passed: bool,
}

fn allowed(subcommand: &str) -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = TOLERANCE_KEYS.to_vec();
    let specific: &[&'static str] = match subcommand {
        "info" => &["q", "alpha", "beta"],
        "diffuse" => &["m", "beta", "n", "init", "sigma", "t0", "t_end", "half_width", "points", "log_dt", "format"],
        "crbound" => &["model", "q", "alpha", "beta", "gamma", "sigma", "n", "theta", "trials", "seed"],
        "stam" => &["q", "alpha", "beta", "perturbations", "seed"],
        "minimize" => &["constraint", "q", "alpha", "beta", "target", "perturbations", "seed", "fit_gap"],
        "qcr" => &["q", "alpha", "beta", "norm_p", "perturbations", "seed"],
        "reproduce" => &["format"],
        _ => &[],
    };
    keys.extend_from_slice(specific);
    if matches!(subcommand, "info" | "stam" | "qcr") {
        keys.extend_from_slice(&DENSITY_KEYS);
    }
    keys.sort_unstable();
    keys.dedup();
    keys
}

fn tolerances(p: &mut Params) -> Result<Tolerances> {
    let d = Tolerances::default();
    let t = Tolerances {
        quadrature_rel: p.get("quadrature_rel", d.quadrature_rel)?,
        identity_rel: p.get("identity_rel", d.identity_rel)?,
        inequality_slack: p.get("inequality_slack", d.inequality_slack)?,
    };
    t.validated().map_err(|e| CliError::Usage(UsageError::new("tolerance", e.to_string())))
}

/// Dispatch one subcommand.
pub fn run(
    subcommand: &str,
    file: BTreeMap<String, String>,
    overrides: BTreeMap<String, String>,
) -> Result<Report> {
    let mut p = Params::new(file, overrides, &allowed(subcommand))?;
    let tol = tolerances(&mut p)?;
    match subcommand {
        "info" => info(&mut p, subcommand),
        "diffuse" => diffuse(&mut p, subcommand, tol),
        "crbound" => crbound(&mut p, subcommand, tol),
        "stam" => stam(&mut p, subcommand, tol),
        "minimize" => minimize(&mut p, subcommand, tol),
        "qcr" => qcr(&mut p, subcommand, tol),
        "reproduce" => reproduce_cmd(&mut p, subcommand),
        other => Err(UsageError::new("subcommand", format!("unknown subcommand {other}")).into()),
    }
}

fn render(subcommand: &str, p: &Params, result: Value, passed: bool) -> Report {
    let doc = json!({
        "subcommand": subcommand,
        "config": p.resolved(),
        "passed": passed,
        "result": result,
    });
    let mut body = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    body.push('\n');
    Report { body, passed }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialization cannot fail")
}

fn seed(p: &mut Params, why: &str) -> Result<u64> {
    Ok(p.require("seed", why)?)
}

fn info(p: &mut Params, name: &str) -> Result<Report> {
    let q = p.get("q", 1.0)?;
    let (alpha, beta) = p.holder_pair(2.0)?;
    let source = Source::from_params(p, q, alpha)?;
    let summary = summarize(|level| source.grid(level), q, beta)?;
    Ok(render(name, p, to_value(&summary), true))
}

fn diffuse(p: &mut Params, name: &str, tol: Tolerances) -> Result<Report> {
    let m = p.get("m", 2.0)?;
    let beta = p.get("beta", 2.0)?;
    let n = p.get("n", 1usize)?;
    let params = DiffusionParams::new(m, beta, n)?;
    let init: String = p.get("init", "barenblatt".to_string())?;
    let half_width = p.get("half_width", 4.0)?;
    let points = p.get("points", 801usize)?;
    let axis = if n == 1 { Axis::symmetric(half_width, points)? } else { Axis::new(0.0, half_width, points)? };
    let state = match init.as_str() {
        "barenblatt" => {
            let t0 = p.get("t0", 1.0)?;
            DiffusionState::barenblatt(params, t0, axis)?
        }
        "gaussian" => {
            let t0 = p.get("t0", 0.0)?;
            let s2 = p.get("sigma", 1.0f64)?.powi(2);
            let nf = n as f64;
            let norm = (2.0 * std::f64::consts::PI * s2).powf(-0.5 * nf);
            let geometry = if n == 1 { qfisher::Geometry::Cartesian } else { qfisher::Geometry::Radial { dim: n } };
            let f = GridDensity::from_fn(geometry, vec![axis], |x| {
                norm * (-0.5 * x.iter().map(|v| v * v).sum::<f64>() / s2).exp()
            })?;
            DiffusionState::new(params, f, t0)?
        }
        other => return Err(UsageError::new("init", format!("unknown initial state `{other}` (barenblatt, gaussian)")).into()),
    };
    let t0 = state.t;
    let t_end = p.get("t_end", t0 + 1.0)?;
    let log_dt = p.get("log_dt", default_log_dt(t0, t_end))?;
    let format: String = p.get("format", "csv".to_string())?;
    let (_, log) = evolve(state, t_end, log_dt)?;
    let checks = if log.len() >= 3 { debruijn_check(&log, tol.identity_rel)? } else { Vec::new() };
    let mut passed = checks.iter().all(|r| r.passed);
    let mono = phi_monotonicity_check(&log, tol.inequality_slack).ok();
    if let Some(r) = &mono {
        passed &= r.passed;
    }
    match format.as_str() {
        "csv" => {
            let mut body = format!("# qfisher {name}\n");
            for (k, v) in p.resolved() {
                body.push_str(&format!("# {k} = {v}\n"));
            }
            body.push_str(&format!("# passed = {passed}\n"));
            body.push_str(&log.to_csv());
            Ok(Report { body, passed })
        }
        "json" => {
            let worst = checks.iter().map(|r| r.get("rel_err").unwrap_or(f64::NAN)).fold(0.0, f64::max);
            let result = json!({
                "log": to_value(&log),
                "debruijn_max_rel_err": worst,
                "debruijn": to_value(&checks),
                "monotonicity": to_value(&mono),
            });
            Ok(render(name, p, result, passed))
        }
        other => Err(UsageError::new("format", format!("`{other}` is not csv or json")).into()),
    }
}

fn crbound(p: &mut Params, name: &str, tol: Tolerances) -> Result<Report> {
    let model_name: String = p.get("model", "gaussian-location".to_string())?;
    let (alpha, _) = p.holder_pair(2.0)?;
    let spec = match model_name.as_str() {
        "gaussian-location" => ModelSpec::GaussianLocation { sigma: p.get("sigma", 1.0)?, dim: p.get("n", 1usize)? },
        "product-normal" => ModelSpec::ProductNormal { dim: p.get("n", 3usize)? },
        "qgaussian-location" => ModelSpec::QgaussianLocation { q: p.get("q", 2.0)?, alpha, gamma: p.get("gamma", 1.0)? },
        "escort-pair" => ModelSpec::EscortPair { q: p.get("q", 2.0)?, alpha, gamma: p.get("gamma", 1.0)? },
        other => {
            return Err(UsageError::new("model", format!("unknown model `{other}` ({})", ModelSpec::NAMES.join(", "))).into())
        }
    };
    let model = spec.build()?;
    let theta_value = p.get("theta", 0.0)?;
    let theta = vec![theta_value; model.dim_theta()];
    let est = EstimatorSpec::sample_mean(alpha)?;
    let report = if model.dim_theta() == 1 {
        crm_bound_scalar(&model, &est, &theta, tol.inequality_slack)?
    } else {
        crm_bound_quadratic(&model, &est, &theta, tol.inequality_slack)?
    };
    let trials = p.get("trials", 0usize)?;
    let mut passed = report.passed;
    let mut mc = Value::Null;
    let mut mc_se = Value::Null;
    if trials > 0 {
        let s = seed(p, "when trials > 0")?;
        let est_mc = mc_error_moment(&model, &est, &theta, trials, s)?;
        // the quadratic form compares squared error moments
        let (value, rhs) = if model.dim_theta() == 1 {
            (est_mc.value, report.rhs)
        } else {
            (est_mc.value.powi(2), report.rhs)
        };
        if let Some(se) = est_mc.std_error {
            let se_value = if model.dim_theta() == 1 { se } else { 2.0 * est_mc.value * se };
            passed &= value >= rhs - 3.0 * se_value;
            mc_se = json!(se_value);
        }
        mc = json!(value);
    }
    let result = json!({
        "model": model_name,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "gap": report.gap,
        "equality_residual": report.get("equality_residual"),
        "mc_value": mc,
        "mc_se": mc_se,
        "report": to_value(&report),
    });
    Ok(render(name, p, result, passed))
}

fn perturbed_values<F>(
    params: &QGaussianParams,
    count: usize,
    seed: u64,
    functional: F,
) -> Result<Vec<f64>>
where
    F: Fn(&GridDensity) -> qfisher::Result<f64> + Sync,
{
    let base = params.grid(GRID_HALF_NODES, GRID_TAIL)?;
    let constraint = Constraint::Moment { alpha: params.alpha(), value: params.moment_alpha()? };
    let half = window_half_width(params);
    let members = batch(count);
    Ok(map_range(members.len(), |i| {
        let m = &members[i];
        functional(&perturb(&base, half, &Direction::random(seed, m.direction), m.amplitude, constraint)?)
    })
    .into_iter()
    .collect::<qfisher::Result<Vec<f64>>>()?)
}

fn stam(p: &mut Params, name: &str, tol: Tolerances) -> Result<Report> {
    let q = p.get("q", 1.0)?;
    let (alpha, beta) = p.holder_pair(2.0)?;
    let source = Source::from_params(p, q, alpha)?;
    let report = stam_ratio(&source.grid(0)?, q, beta, tol.inequality_slack)?;
    let count = p.get("perturbations", 0usize)?;
    let mut passed = report.passed;
    let family = QGaussianParams::new(q, alpha, 1.0, 1)?;
    let value_g = stam_product_exact(&family)?;
    let (mut min_perturbed, mut worst_gap) = (Value::Null, Value::Null);
    if count > 0 {
        let s = seed(p, "when perturbations > 0")?;
        let ratios = perturbed_values(&family, count, s, |f| Ok(stam_ratio(f, q, beta, tol.inequality_slack)?.lhs))?;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        passed &= min > 1.0 - tol.inequality_slack;
        min_perturbed = json!(min * value_g);
        worst_gap = json!((min - 1.0) * value_g);
    }
    let result = json!({
        "value_G": value_g,
        "ratio": report.lhs,
        "min_perturbed": min_perturbed,
        "worst_gap": worst_gap,
        "verdict": passed,
        "report": to_value(&report),
    });
    Ok(render(name, p, result, passed))
}

fn extremal_value(r: &ExtremalReport) -> Value {
    json!({
        "value_G": r.value_g,
        "min_perturbed": r.min_perturbed,
        "worst_gap": r.worst_gap,
        "verdict": r.verdict,
        "gamma": r.params.gamma(),
        "gap_fit": to_value(&r.gap_fit),
        "report": to_value(&r.report),
    })
}

fn minimize(p: &mut Params, name: &str, tol: Tolerances) -> Result<Report> {
    let constraint: String = p.get("constraint", "moment".to_string())?;
    let q = p.get("q", 2.0)?;
    let (alpha, beta) = p.holder_pair(2.0)?;
    let settings = BatchSettings {
        count: p.get("perturbations", 50usize)?,
        seed: seed(p, "for the perturbation batch")?,
        slack: tol.inequality_slack,
        fit_gap: p.get("fit_gap", true)?,
    };
    let unit = QGaussianParams::new(q, alpha, 1.0, 1)?;
    let r = match constraint.as_str() {
        "moment" => {
            let target = p.get("target", unit.moment_alpha()?)?;
            min_fisher_fixed_moment(q, alpha, target, 1, settings)?
        }
        "entropy" => {
            let target = p.get("target", unit.entropy_power_exact(q)?)?;
            min_fisher_fixed_entropy(q, beta, target, 1, settings)?
        }
        "max-entropy" => {
            let target = p.get("target", unit.moment_alpha()?)?;
            max_entropy_fixed_moment(q, alpha, target, 1, settings)?
        }
        other => {
            return Err(UsageError::new("constraint", format!("unknown constraint `{other}` (moment, entropy, max-entropy)")).into())
        }
    };
    Ok(render(name, p, extremal_value(&r), r.verdict))
}

fn qcr(p: &mut Params, name: &str, tol: Tolerances) -> Result<Report> {
    let q = p.get("q", 1.0)?;
    let (alpha, _) = p.holder_pair(2.0)?;
    let norm = match p.get("norm_p", 2.0)? {
        2.0 => Norm::Euclidean,
        v if v > 1.0 => Norm::P(v),
        _ => return Err(UsageError::new("norm_p", "must be > 1").into()),
    };
    let source = Source::from_params(p, q, alpha)?;
    let report: VerificationReport = qcr_product(&source.grid(0)?, q, alpha, norm, tol.inequality_slack)?;
    let count = p.get("perturbations", 0usize)?;
    let mut passed = report.passed;
    let mut min_gap = Value::Null;
    if count > 0 {
        let s = seed(p, "when perturbations > 0")?;
        let family = QGaussianParams::new(q, alpha, 1.0, 1)?;
        let products = perturbed_values(&family, count, s, |f| Ok(qcr_product(f, q, alpha, norm, tol.inequality_slack)?.lhs))?;
        let gap = products.iter().map(|v| v - 1.0).fold(f64::INFINITY, f64::min);
        passed &= gap > -tol.inequality_slack;
        min_gap = json!(gap);
    }
    let result = json!({
        "product": report.lhs,
        "n": report.rhs,
        "gap": report.gap,
        "min_perturbed_gap": min_gap,
        "report": to_value(&report),
    });
    Ok(render(name, p, result, passed))
}

fn reproduce_cmd(p: &mut Params, name: &str) -> Result<Report> {
    let format: String = p.get("format", "text".to_string())?;
    let summary = reproduce();
    let passed = summary.passed();
    match format.as_str() {
        "text" => Ok(Report { body: summary.table(), passed }),
        "json" => Ok(render(name, p, to_value(&summary), passed)),
        other => Err(UsageError::new("format", format!("`{other}` is not text or json")).into()),
    }
}
