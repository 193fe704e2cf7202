//! Stam-type inequality and the extremal properties of q-Gaussians.
//!
//! The Stam product `I_{β,q}[f]^(1/β) N_q[f]^(1/2)` is bounded below by its
//! value at the q-Gaussian with `α = β/(β-1)`, provided
//! `q > max((n-1)/n, n/(n+α))`. Under `x -> c x`, `I_{β,q}` scales as
//! `c^(-β)` and `N_q` as `c^2`, so the product is dilation invariant for
//! every `β`; [`stam_scaling`] measures this law on the grid.
//!
//! Minimality of q-Gaussians (for `I_{β,q}` at fixed α-moment or fixed
//! entropy power) and maximality of `S_q` at fixed α-moment are certified
//! against batches of random perturbations from [`crate::perturb`].
//! Perturbation batches live on one-dimensional grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{entropy_power, i_fisher, tsallis_entropy};
use crate::numerics::par::map_range;
use crate::numerics::{solve_positive, GridDensity};
use crate::perturb::{batch, perturb, window_half_width, Constraint, Direction};
use crate::qgaussian::QGaussianParams;
use crate::report::{relative_error, VerificationReport};

/// Half the node count of q-Gaussian reference grids.
pub const GRID_HALF_NODES: usize = 2000;
/// Tail mass dropped when truncating heavy-tailed reference grids.
pub const GRID_TAIL: f64 = 1e-12;
/// Amplitudes for the gap-exponent fit.
pub const GAP_LADDER: [f64; 5] = [0.005, 0.01, 0.02, 0.04, 0.08];
/// Accepted range of the fitted gap exponent.
pub const GAP_EXPONENT_RANGE: (f64, f64) = (1.7, 2.3);

/// `q > max((n-1)/n, n/(n+α))`.
pub fn stam_hypothesis(q: f64, alpha: f64, n: usize) -> bool {
    let n = n as f64;
    q > ((n - 1.0) / n).max(n / (n + alpha))
}

/// `λ = n(q-1) + 1`, positive wherever the Stam bound is asserted.
pub fn lambda(q: f64, n: usize) -> f64 {
    n as f64 * (q - 1.0) + 1.0
}

fn conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParams(format!("exponent {p} must be finite and > 1")));
    }
    Ok(p / (p - 1.0))
}

fn finite_fisher(f: &GridDensity, q: f64, beta: f64) -> Result<f64> {
    let v = i_fisher(f, q, beta)?;
    if !v.is_finite() {
        return Err(Error::Divergent { what: "I_(beta,q)".into(), trace: vec![v] });
    }
    Ok(v)
}

/// `I_{β,q}[f]^(1/β) N_q[f]^(1/2)`.
pub fn stam_product(f: &GridDensity, q: f64, beta: f64) -> Result<f64> {
    Ok(finite_fisher(f, q, beta)?.powf(1.0 / beta) * entropy_power(f, q)?.sqrt())
}

/// Closed-form Stam product of a q-Gaussian.
pub fn stam_product_exact(g: &QGaussianParams) -> Result<f64> {
    let (q, beta) = (g.q(), g.beta());
    Ok(g.i_fisher_exact(q, beta)?.powf(1.0 / beta) * g.entropy_power_exact(q)?.sqrt())
}

/// Reference q-Gaussian for the Stam ratio of `f`: `γ = 1` when `β = 2`,
/// otherwise the `γ` whose α-moment matches that of `f`.
pub fn stam_reference(f: &GridDensity, q: f64, beta: f64) -> Result<QGaussianParams> {
    let alpha = conjugate(beta)?;
    let unit = QGaussianParams::new(q, alpha, 1.0, f.dim())?;
    if beta == 2.0 {
        return Ok(unit);
    }
    let target = f.expectation(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(alpha))?;
    moment_matched(&unit, target)
}

/// Ratio of the Stam product of `f` to that of the reference q-Gaussian;
/// at least 1 under the hypothesis on `q`.
///
/// Diagnostics: `product`, `product_reference` (closed form),
/// `product_reference_grid` (reference sampled on a grid), `lambda`.
pub fn stam_ratio(f: &GridDensity, q: f64, beta: f64, slack: f64) -> Result<VerificationReport> {
    let alpha = conjugate(beta)?;
    let n = f.dim();
    if !stam_hypothesis(q, alpha, n) {
        return Err(Error::InvalidParams(format!(
            "q={q} violates q > max((n-1)/n, n/(n+alpha)) for n={n}, alpha={alpha}"
        )));
    }
    let reference = stam_reference(f, q, beta)?;
    let exact = stam_product_exact(&reference)?;
    let product = stam_product(f, q, beta)?;
    let report = VerificationReport::inequality("Stam", product / exact, 1.0, slack)
        .with("product", product)
        .with("product_reference", exact)
        .with("lambda", lambda(q, n))
        .with("gamma_reference", reference.gamma());
    let grid = reference.grid(GRID_HALF_NODES, GRID_TAIL)?;
    let report = report.with("product_reference_grid", stam_product(&grid, q, beta)?);
    Ok(report)
}

/// Least-squares exponents of `I_{β,q}`, `N_q` and the Stam product
/// against the dilation factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub factors: Vec<f64>,
    pub products: Vec<f64>,
    pub fisher_exponent: f64,
    pub power_exponent: f64,
    pub product_exponent: f64,
}

impl ScalingLaw {
    /// Largest relative spread of the product over the dilations.
    pub fn product_spread(&self) -> f64 {
        let p0 = self.products[0];
        self.products.iter().map(|p| relative_error(*p, p0)).fold(0.0, f64::max)
    }
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Dilate `f` by each factor and fit the log-log scaling of the Stam
/// ingredients.
pub fn stam_scaling(f: &GridDensity, q: f64, beta: f64, factors: &[f64]) -> Result<ScalingLaw> {
    if factors.len() < 2 {
        return Err(Error::InvalidParams("scaling fit needs at least two factors".into()));
    }
    let mut log_c = Vec::new();
    let (mut log_i, mut log_n, mut products) = (Vec::new(), Vec::new(), Vec::new());
    for &c in factors {
        let fc = f.dilated(c)?;
        let i = finite_fisher(&fc, q, beta)?;
        let p = entropy_power(&fc, q)?;
        log_c.push(c.ln());
        log_i.push(i.ln());
        log_n.push(p.ln());
        products.push(i.powf(1.0 / beta) * p.sqrt());
    }
    let log_p: Vec<f64> = products.iter().map(|p| p.ln()).collect();
    Ok(ScalingLaw {
        factors: factors.to_vec(),
        fisher_exponent: slope(&log_c, &log_i),
        power_exponent: slope(&log_c, &log_n),
        product_exponent: slope(&log_c, &log_p),
        products,
    })
}

/// `params` rescaled so that `E[||X||^α] = target`.
pub fn moment_matched(params: &QGaussianParams, target: f64) -> Result<QGaussianParams> {
    positive_target(target)?;
    let gamma = solve_positive(
        |g| match params.with_gamma(g).and_then(|p| p.moment_alpha()) {
            Ok(m) => m.ln() - target.ln(),
            Err(_) => f64::NAN,
        },
        params.gamma(),
        1e-14,
    )?;
    params.with_gamma(gamma)
}

/// `params` rescaled so that `N_q = target` (with `q` the family index).
pub fn entropy_matched(params: &QGaussianParams, target: f64) -> Result<QGaussianParams> {
    positive_target(target)?;
    let q = params.q();
    let gamma = solve_positive(
        |g| match params.with_gamma(g).and_then(|p| p.entropy_power_exact(q)) {
            Ok(v) => v.ln() - target.ln(),
            Err(_) => f64::NAN,
        },
        params.gamma(),
        1e-14,
    )?;
    params.with_gamma(gamma)
}

fn positive_target(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParams(format!("target {t} must be positive")));
    }
    Ok(())
}

/// Fitted `gap ~ C a^p` along one perturbation direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapFit {
    pub amplitudes: Vec<f64>,
    pub gaps: Vec<f64>,
    pub exponent: f64,
    pub monotone: bool,
}

impl GapFit {
    pub fn in_range(&self) -> bool {
        self.exponent >= GAP_EXPONENT_RANGE.0 && self.exponent <= GAP_EXPONENT_RANGE.1
    }
}

/// Fit of `functional(perturbed) - functional(G)` against the amplitude.
pub fn gap_fit<F>(
    base: &GridDensity,
    half_width: f64,
    constraint: Constraint,
    direction: &Direction,
    amplitudes: &[f64],
    functional: F,
) -> Result<GapFit>
where
    F: Fn(&GridDensity) -> Result<f64>,
{
    let v0 = functional(base)?;
    let gaps = amplitudes
        .iter()
        .map(|&a| Ok(functional(&perturb(base, half_width, direction, a, constraint)?)? - v0))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] > w[0]) && gaps[0] > 0.0;
    let exponent = if gaps.iter().all(|g| *g > 0.0) {
        let la: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
        let lg: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
        slope(&la, &lg)
    } else {
        f64::NAN
    };
    Ok(GapFit { amplitudes: amplitudes.to_vec(), gaps, exponent, monotone })
}

/// Outcome of a perturbation-based extremality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    /// Functional at the q-Gaussian, on its grid.
    pub value_g: f64,
    /// Smallest functional value over the perturbed batch (largest for a
    /// maximization).
    pub min_perturbed: f64,
    /// Smallest margin by which the q-Gaussian wins.
    pub worst_gap: f64,
    pub verdict: bool,
    pub params: QGaussianParams,
    /// Perturbed values in batch order.
    pub values: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub gap_fit: Option<GapFit>,
    pub report: VerificationReport,
}

impl ExtremalReport {
    /// Amplitude of the batch member with the smallest margin.
    pub fn argmin_amplitude(&self) -> f64 {
        let margins: Vec<f64> = self.values.iter().map(|v| (v - self.value_g).abs()).collect();
        let i = (0..margins.len())
            .min_by(|&a, &b| margins[a].total_cmp(&margins[b]))
            .unwrap_or(0);
        self.amplitudes.get(i).copied().unwrap_or(f64::NAN)
    }
}

/// Settings shared by the extremality checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSettings {
    pub count: usize,
    pub seed: u64,
    pub slack: f64,
    /// Also fit the gap exponent along direction 0.
    pub fit_gap: bool,
}

fn one_dim(n: usize) -> Result<()> {
    if n != 1 {
        return Err(Error::InvalidParams(format!(
            "perturbation batches are one-dimensional, got n={n}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Minimum,
    Maximum,
}

fn extremal<F>(
    name: &str,
    params: QGaussianParams,
    constraint: Constraint,
    settings: BatchSettings,
    sense: Sense,
    functional: F,
) -> Result<ExtremalReport>
where
    F: Fn(&GridDensity) -> Result<f64> + Sync,
{
    let base = params.grid(GRID_HALF_NODES, GRID_TAIL)?;
    let half_width = window_half_width(&params);
    let value_g = functional(&base)?;
    let members = batch(settings.count);
    let values = map_range(members.len(), |i| {
        let m = &members[i];
        let dir = Direction::random(settings.seed, m.direction);
        functional(&perturb(&base, half_width, &dir, m.amplitude, constraint)?)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let sign = if sense == Sense::Minimum { 1.0 } else { -1.0 };
    let worst = values
        .iter()
        .map(|v| sign * (v - value_g))
        .fold(f64::INFINITY, f64::min);
    let extreme = values.iter().copied().fold(f64::NAN, |acc, v| match sense {
        Sense::Minimum => acc.min(v),
        Sense::Maximum => acc.max(v),
    });
    let (lhs, rhs) = match sense {
        Sense::Minimum => (extreme, value_g),
        Sense::Maximum => (value_g, extreme),
    };
    let mut report = VerificationReport::inequality(name, lhs, rhs, settings.slack)
        .with("gamma", params.gamma())
        .with("count", settings.count as f64);
    let gap_fit = if settings.fit_gap {
        let dir = Direction::random(settings.seed, 0);
        let fit = gap_fit(&base, half_width, constraint, &dir, &GAP_LADDER, |f| {
            Ok(sign * functional(f)?)
        })?;
        report = report
            .with("gap_exponent", fit.exponent)
            .require(fit.monotone, "gap is not monotone in the amplitude")
            .require(fit.in_range(), format!("gap exponent {} outside {:?}", fit.exponent, GAP_EXPONENT_RANGE));
        Some(fit)
    } else {
        None
    };
    Ok(ExtremalReport {
        value_g,
        min_perturbed: extreme,
        worst_gap: worst,
        verdict: report.passed,
        params,
        amplitudes: members.iter().map(|m| m.amplitude).collect(),
        values,
        gap_fit,
        report,
    })
}

/// `I_{β,q}[G] <= I_{β,q}[p]` over perturbations `p` sharing the α-moment
/// `target_m` of the q-Gaussian `G` (`β = α/(α-1)`).
pub fn min_fisher_fixed_moment(
    q: f64,
    alpha: f64,
    target_m: f64,
    n: usize,
    settings: BatchSettings,
) -> Result<ExtremalReport> {
    one_dim(n)?;
    let beta = conjugate(alpha)?;
    let params = moment_matched(&QGaussianParams::new(q, alpha, 1.0, n)?, target_m)?;
    let constraint = Constraint::Moment { alpha, value: target_m };
    let mut out = extremal("minimum Fisher at fixed moment", params, constraint, settings, Sense::Minimum, |f| {
        finite_fisher(f, q, beta)
    })?;
    let exact = params.i_fisher_exact(q, beta)?;
    out.report = out
        .report
        .clone()
        .with("value_g_exact", exact)
        .with("moment_residual", relative_error(params.moment_alpha()?, target_m));
    Ok(out)
}

/// `I_{β,q}[G] <= I_{β,q}[p]` over perturbations `p` sharing the entropy
/// power `target_n` of `G` (`α = β/(β-1)`).
///
/// Diagnostics: `stam_ratio_g` and `min_stam_ratio_perturbed`.
pub fn min_fisher_fixed_entropy(
    q: f64,
    beta: f64,
    target_n: f64,
    n: usize,
    settings: BatchSettings,
) -> Result<ExtremalReport> {
    one_dim(n)?;
    let alpha = conjugate(beta)?;
    let params = entropy_matched(&QGaussianParams::new(q, alpha, 1.0, n)?, target_n)?;
    let constraint = Constraint::EntropyPower { q, value: target_n };
    let mut out = extremal("minimum Fisher at fixed entropy power", params, constraint, settings, Sense::Minimum, |f| {
        finite_fisher(f, q, beta)
    })?;
    let exact_product = stam_product_exact(&params)?;
    let ratio = |i: f64| i.powf(1.0 / beta) * target_n.sqrt() / exact_product;
    let min_ratio = out.values.iter().map(|&i| ratio(i)).fold(f64::INFINITY, f64::min);
    out.report = out
        .report
        .clone()
        .with("value_g_exact", params.i_fisher_exact(q, beta)?)
        .with("stam_ratio_g", ratio(out.value_g))
        .with("min_stam_ratio_perturbed", min_ratio);
    Ok(out)
}

/// `S_q[G] >= S_q[p]` over perturbations `p` sharing the α-moment of `G`.
pub fn max_entropy_fixed_moment(
    q: f64,
    alpha: f64,
    target_m: f64,
    n: usize,
    settings: BatchSettings,
) -> Result<ExtremalReport> {
    one_dim(n)?;
    let params = moment_matched(&QGaussianParams::new(q, alpha, 1.0, n)?, target_m)?;
    let constraint = Constraint::Moment { alpha, value: target_m };
    extremal("maximum entropy at fixed moment", params, constraint, settings, Sense::Maximum, |f| {
        tsallis_entropy(f, q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn settings(count: usize) -> BatchSettings {
        BatchSettings { count, seed: 17, slack: 1e-9, fit_gap: false }
    }

    #[test]
    fn hypothesis_and_lambda() {
        assert!(stam_hypothesis(1.0, 2.0, 1));
        assert!(!stam_hypothesis(0.3, 2.0, 1));
        assert!(!stam_hypothesis(0.5, 2.0, 2));
        assert_eq!(lambda(2.0, 3), 4.0);
    }

    #[test]
    fn gaussian_stam_product() {
        let g = QGaussianParams::standard_normal(1);
        let f = g.grid(GRID_HALF_NODES, GRID_TAIL).unwrap();
        let expected = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
        assert!(relative_error(stam_product_exact(&g).unwrap(), expected) < 1e-12);
        let r = stam_ratio(&f, 1.0, 2.0, 1e-9).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn stam_product_is_the_same_across_the_family() {
        for (q, beta) in [(1.0, 2.0), (2.0, 2.0), (1.5, 1.5), (2.0, 3.0)] {
            let alpha = beta / (beta - 1.0);
            let a = stam_product_exact(&QGaussianParams::new(q, alpha, 1.0, 1).unwrap()).unwrap();
            let b = stam_product_exact(&QGaussianParams::new(q, alpha, 7.3, 1).unwrap()).unwrap();
            assert!(relative_error(a, b) < 1e-12);
        }
    }

    #[test]
    fn scaling_law_holds_for_several_betas() {
        for (q, beta) in [(1.0, 2.0), (2.0, 2.0), (2.0, 1.5), (1.5, 3.0)] {
            let g = QGaussianParams::new(q, beta / (beta - 1.0), 1.0, 1).unwrap();
            let f = g.grid(GRID_HALF_NODES, GRID_TAIL).unwrap();
            let law = stam_scaling(&f, q, beta, &[0.5, 0.8, 1.0, 1.7, 3.0]).unwrap();
            assert!((law.fisher_exponent + beta).abs() < 1e-9, "{law:?}");
            assert!((law.power_exponent - 2.0).abs() < 1e-9);
            assert!(law.product_exponent.abs() < 1e-9);
            assert!(law.product_spread() < 1e-8);
        }
    }

    #[test]
    fn mixture_is_strict() {
        let mix = GridDensity::cartesian_1d(-8.0, 8.0, 4001, |x| {
            let z = |m: f64| (-(x - m).powi(2) / 0.5).exp();
            z(2.0) + z(-2.0)
        })
        .unwrap()
        .normalize()
        .unwrap();
        let r = stam_ratio(&mix, 1.0, 2.0, 1e-9).unwrap();
        assert!(r.passed && r.lhs > 1.5);
    }

    #[test]
    fn matched_parameters() {
        let p = QGaussianParams::new(2.0, 2.0, 3.0, 1).unwrap();
        assert!((moment_matched(&p, 0.2).unwrap().gamma() - 1.0).abs() < 1e-12);
        let n = QGaussianParams::new(1.0, 2.0, 1.0, 1).unwrap();
        let m = entropy_matched(&n, 2.0 * std::f64::consts::PI * std::f64::consts::E).unwrap();
        assert!((m.gamma() - 0.5).abs() < 1e-12);
        assert!(moment_matched(&p, -1.0).is_err());
    }

    #[test]
    fn normal_minimizes_fisher_at_unit_variance() {
        let r = min_fisher_fixed_moment(1.0, 2.0, 1.0, 1, settings(10)).unwrap();
        assert!((r.value_g - 1.0).abs() < 1e-6);
        assert!(r.verdict && r.worst_gap > 0.0, "{:?}", r.report);
    }

    #[test]
    fn entropy_constraint_recovers_normal() {
        let target = 2.0 * std::f64::consts::PI * std::f64::consts::E;
        let r = min_fisher_fixed_entropy(1.0, 2.0, target, 1, settings(10)).unwrap();
        assert!((r.value_g - 1.0).abs() < 1e-6);
        assert!((r.report.get("stam_ratio_g").unwrap() - 1.0).abs() < 1e-4);
        assert!(r.report.get("min_stam_ratio_perturbed").unwrap() > 1.0);
        assert!(r.verdict);
    }

    #[test]
    fn tsallis_entropy_is_maximal() {
        let r = max_entropy_fixed_moment(2.0, 2.0, 0.2, 1, settings(10)).unwrap();
        assert!(r.verdict && r.worst_gap > 0.0, "{:?}", r.report);
    }

    #[test]
    fn batches_need_one_dimension() {
        assert!(min_fisher_fixed_moment(1.0, 2.0, 1.0, 2, settings(1)).is_err());
    }

    #[test]
    fn stam_rejects_hypothesis_violation() {
        let f = QGaussianParams::standard_normal(1).grid(200, 1e-12).unwrap();
        assert!(stam_ratio(&f, 0.3, 2.0, 1e-9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn slope_recovers_power_laws(p in -3.0f64..3.0, c in 0.1f64..10.0) {
            let x: Vec<f64> = [0.1f64, 0.5, 1.0, 2.0].iter().map(|v| v.ln()).collect();
            let y: Vec<f64> = x.iter().map(|l| c.ln() + p * l).collect();
            prop_assert!((slope(&x, &y) - p).abs() < 1e-12);
        }
    }
}
