//! Cramér–Rao type bounds where the error moment is taken under a second
//! density `g` and the score is `ψ_g = ∇_θ f / g`.
//!
//! A [`ParametricModel`] bundles the pair `(f, g)` as black-box closures
//! together with the grid used to integrate over `x`. Parameter gradients
//! are centred differences with step `1e-5 (1 + |θ_j|)`.

mod models;

pub use models::ModelSpec;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::i_fisher_with_norm;
use crate::numerics::quadrature::simpson_weights;
use crate::numerics::{par, Axis, GridDensity, Norm};
use crate::qgaussian::{shard_rng, sharded_draws};
use crate::report::VerificationReport;

/// `(x, θ) ↦ density`.
pub type DensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `(θ, seed, count) ↦ draws from g(·; θ)`.
pub type SamplerFn = Arc<dyn Fn(&[f64], u64, usize) -> Vec<Vec<f64>> + Send + Sync>;
/// Real function of a point.
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Tolerance on `∫ f` and `∫ g` at the probe parameters.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// A pair of parametric densities `f(x; θ)`, `g(x; θ)` on R^n, θ ∈ R^k.
#[derive(Clone)]
pub struct ParametricModel {
    name: String,
    f: DensityFn,
    g: DensityFn,
    dim_theta: usize,
    axes: Vec<Axis>,
    points: Arc<Vec<Vec<f64>>>,
    weights: Arc<Vec<f64>>,
    sampler: Option<SamplerFn>,
}

impl fmt::Debug for ParametricModel {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("ParametricModel")
            .field("name", &self.name)
            .field("dim_x", &self.axes.len())
            .field("dim_theta", &self.dim_theta)
            .field("nodes", &self.points.len())
            .finish()
    }
}

impl ParametricModel {
    /// Build a model integrated over the cartesian tensor grid `axes`.
    /// Both densities must integrate to one at every parameter in `probes`.
    pub fn new(
        name: impl Into<String>,
        f: DensityFn,
        g: DensityFn,
        axes: Vec<Axis>,
        dim_theta: usize,
        probes: &[Vec<f64>],
    ) -> Result<Self> {
        if dim_theta == 0 || axes.is_empty() {
            return Err(Error::InvalidParams("model needs k >= 1 and n >= 1".into()));
        }
        // tensor Simpson rule; not limited to the dimensions of GridDensity
        let per_axis: Vec<Vec<f64>> = axes.iter().map(|a| simpson_weights(a.points, a.step())).collect();
        let total: usize = axes.iter().map(|a| a.points).product();
        let (points, weights): (Vec<Vec<f64>>, Vec<f64>) = (0..total)
            .map(|mut i| {
                let mut x = vec![0.0; axes.len()];
                let mut w = 1.0;
                for k in (0..axes.len()).rev() {
                    let j = i % axes[k].points;
                    i /= axes[k].points;
                    x[k] = axes[k].coord(j);
                    w *= per_axis[k][j];
                }
                (x, w)
            })
            .unzip();
        let model = ParametricModel {
            name: name.into(),
            f,
            g,
            dim_theta,
            axes,
            points: Arc::new(points),
            weights: Arc::new(weights),
            sampler: None,
        };
        for theta in probes {
            model.check_theta(theta)?;
            for (label, dens) in [("f", &model.f), ("g", &model.g)] {
                let mass = model.integrate(|x| dens(x, theta))?;
                if (mass - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidParams(format!(
                        "{label} integrates to {mass} at theta={theta:?}"
                    )));
                }
            }
        }
        Ok(model)
    }

    pub fn with_sampler(mut self, sampler: SamplerFn) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim_x(&self) -> usize {
        self.axes.len()
    }
    pub fn dim_theta(&self) -> usize {
        self.dim_theta
    }
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }
    pub fn f(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.f)(x, theta)
    }
    pub fn g(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.g)(x, theta)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim_theta || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "theta {theta:?} does not match k = {}",
                self.dim_theta
            )));
        }
        Ok(())
    }

    /// Finite-difference step for component `j`.
    pub fn dtheta(theta: &[f64], j: usize) -> f64 {
        1e-5 * (1.0 + theta[j].abs())
    }

    fn integrate<H>(&self, h: H) -> Result<f64>
    where
        H: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let vals = par::map_range(self.points.len(), |i| self.weights[i] * h(&self.points[i]));
        let total: f64 = vals.iter().sum();
        if !total.is_finite() {
            return Err(Error::Divergent {
                what: format!("integral over x for model {}", self.name),
                trace: vec![total],
            });
        }
        Ok(total)
    }

    /// `∫ h(x) g(x; θ) dx`.
    pub fn expect_g<H>(&self, theta: &[f64], h: H) -> Result<f64>
    where
        H: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.integrate(|x| {
            let g = self.g(x, theta);
            if g > 0.0 {
                g * h(x)
            } else {
                0.0
            }
        })
    }

    /// `∫ h(x) f(x; θ) dx`.
    pub fn expect_f<H>(&self, theta: &[f64], h: H) -> Result<f64>
    where
        H: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.integrate(|x| {
            let f = self.f(x, theta);
            if f > 0.0 {
                f * h(x)
            } else {
                0.0
            }
        })
    }

    /// `∇_θ f(x; θ)` by centred differences.
    pub fn grad_theta_f(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut th = theta.to_vec();
        (0..self.dim_theta)
            .map(|j| {
                let d = Self::dtheta(theta, j);
                th[j] = theta[j] + d;
                let up = self.f(x, &th);
                th[j] = theta[j] - d;
                let down = self.f(x, &th);
                th[j] = theta[j];
                (up - down) / (2.0 * d)
            })
            .collect()
    }
}

/// `ψ_g(x; θ) = ∇_θ f(x; θ) / g(x; θ)`.
///
/// Where `g` vanishes the score is zero if `x` lies on the boundary of the
/// support of `f` (so the difference quotient only sees a kink) and a
/// [`Error::SingularScore`] if `f` has mass around `x`.
pub fn score_g(model: &ParametricModel, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    model.check_theta(theta)?;
    score_at(model, theta, x)
}

fn score_at(model: &ParametricModel, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let grad = model.grad_theta_f(x, theta);
    let g = model.g(x, theta);
    if g > 0.0 {
        return Ok(grad.into_iter().map(|d| d / g).collect());
    }
    if grad.iter().all(|&d| d == 0.0) {
        return Ok(grad);
    }
    let mut th = theta.to_vec();
    let interior = model.f(x, theta) > 0.0
        || (0..model.dim_theta).any(|j| {
            let d = ParametricModel::dtheta(theta, j);
            th[j] = theta[j] + d;
            let up = model.f(x, &th);
            th[j] = theta[j] - d;
            let down = model.f(x, &th);
            th[j] = theta[j];
            up > 0.0 && down > 0.0
        });
    if interior {
        Err(Error::SingularScore {
            x: x.to_vec(),
            grad,
        })
    } else {
        Ok(vec![0.0; model.dim_theta])
    }
}

/// Score and `g` at every quadrature node, with the node weights.
#[derive(Clone, Debug)]
pub struct ScoreField {
    /// Quadrature weight times `g` at each node.
    pub weight: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
}

impl ScoreField {
    pub fn mean(&self) -> Vec<f64> {
        let k = self.psi.first().map_or(0, Vec::len);
        (0..k)
            .map(|j| self.weight.iter().zip(&self.psi).map(|(w, p)| w * p[j]).sum())
            .collect()
    }
}

pub fn score_field(model: &ParametricModel, theta: &[f64]) -> Result<ScoreField> {
    model.check_theta(theta)?;
    let rows = par::map_range(model.points.len(), |i| {
        let x = &model.points[i];
        let g = model.g(x, theta);
        score_at(model, theta, x).map(|psi| (model.weights[i] * g.max(0.0), psi))
    });
    let mut weight = Vec::with_capacity(rows.len());
    let mut psi = Vec::with_capacity(rows.len());
    for row in rows {
        let (w, p) = row?;
        weight.push(w);
        psi.push(p);
    }
    Ok(ScoreField { weight, psi })
}

/// `E_g[ψ_g]`, zero for every valid model.
pub fn score_mean(model: &ParametricModel, theta: &[f64]) -> Result<Vec<f64>> {
    Ok(score_field(model, theta)?.mean())
}

/// An estimator `T(x)` of `h(θ)` judged by the error moment of order `α`.
#[derive(Clone)]
pub struct EstimatorSpec {
    pub t: PointFn,
    pub h: PointFn,
    alpha: f64,
}

impl fmt::Debug for EstimatorSpec {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("EstimatorSpec").field("alpha", &self.alpha).finish()
    }
}

impl EstimatorSpec {
    pub fn new(t: PointFn, h: PointFn, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::InvalidParams(format!("error moment order alpha={alpha} must be > 1")));
        }
        Ok(EstimatorSpec { t, h, alpha })
    }

    /// `T(x) = mean(x)` estimating `h(θ) = mean(θ)`.
    pub fn sample_mean(alpha: f64) -> Result<Self> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        EstimatorSpec::new(Arc::new(mean), Arc::new(mean), alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Hölder conjugate `β = α/(α-1)`.
    pub fn beta(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }
}

/// `η(θ) = E_f[T(X)]`.
pub fn eta(model: &ParametricModel, est: &EstimatorSpec, theta: &[f64]) -> Result<f64> {
    model.expect_f(theta, |x| (est.t)(x))
}

/// `∇_θ η` by centred differences.
pub fn eta_dot(model: &ParametricModel, est: &EstimatorSpec, theta: &[f64]) -> Result<DVector<f64>> {
    model.check_theta(theta)?;
    let mut th = theta.to_vec();
    let mut out = DVector::zeros(model.dim_theta);
    for j in 0..model.dim_theta {
        let d = ParametricModel::dtheta(theta, j);
        th[j] = theta[j] + d;
        let up = eta(model, est, &th)?;
        th[j] = theta[j] - d;
        let down = eta(model, est, &th)?;
        th[j] = theta[j];
        out[j] = (up - down) / (2.0 * d);
    }
    Ok(out)
}

/// `E_g[|T(X) - h(θ)|^α]`.
pub fn error_moment(model: &ParametricModel, est: &EstimatorSpec, theta: &[f64]) -> Result<f64> {
    let h = (est.h)(theta);
    model.expect_g(theta, |x| ((est.t)(x) - h).abs().powf(est.alpha))
}

/// Best `c > 0` for `y ≈ c s` in the weighted L1 sense, and the residual
/// `Σ w |y - c s|` relative to `Σ w |y|`.
///
/// The minimizer is the weighted median of `y/s` with weights `w |s|`;
/// nodes with `s = 0` only add to the residual.
pub fn l1_proportional_fit(w: &[f64], y: &[f64], s: &[f64]) -> (f64, f64) {
    let norm: f64 = w.iter().zip(y).map(|(w, y)| w * y.abs()).sum();
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let mut ratios: Vec<(f64, f64)> = w
        .iter()
        .zip(y.iter().zip(s))
        .filter(|(&w, (_, &s))| w > 0.0 && s != 0.0)
        .map(|(&w, (&y, &s))| (y / s, w * s.abs()))
        .collect();
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = ratios.iter().map(|r| r.1).sum();
    let mut acc = 0.0;
    let mut c = 0.0;
    for (r, wt) in &ratios {
        acc += wt;
        if acc >= 0.5 * total {
            c = *r;
            break;
        }
    }
    let c = c.max(0.0);
    let resid: f64 = w
        .iter()
        .zip(y.iter().zip(s))
        .map(|(w, (y, s))| w * (y - c * s).abs())
        .sum();
    (c, resid / norm)
}

fn signed_power(e: f64, p: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e.signum() * e.abs().powf(p)
    }
}

fn divergent_report(name: &str, err: Error) -> Result<VerificationReport> {
    match err {
        Error::Divergent { what, .. } => Ok(VerificationReport::inequality(name, f64::NAN, f64::NAN, 0.0)
            .note(format!("divergent: {what}"))),
        e => Err(e),
    }
}

/// Scalar bound `E_g[|T-h|^α]^(1/α) >= |η̇| / E_g[|ψ_g|^β]^(1/β)` (k = 1).
///
/// Diagnostics: `eta_dot`, `equality_c` and `equality_residual`, the
/// relative L1 misfit of `ψ_g ≈ c sign(T-h) |T-h|^(α-1)` at the best
/// `c > 0`.
pub fn crm_bound_scalar(
    model: &ParametricModel,
    est: &EstimatorSpec,
    theta: &[f64],
    slack: f64,
) -> Result<VerificationReport> {
    const NAME: &str = "scalar Cramér-Rao";
    if model.dim_theta != 1 {
        return Err(Error::InvalidParams(format!(
            "scalar bound needs k = 1, model has k = {}",
            model.dim_theta
        )));
    }
    let (a, b) = (est.alpha, est.beta());
    let moment = match error_moment(model, est, theta) {
        Ok(m) => m,
        Err(e) => return divergent_report(NAME, e),
    };
    let ed = eta_dot(model, est, theta)?[0];
    let field = score_field(model, theta)?;
    let psi_b: f64 = field.weight.iter().zip(&field.psi).map(|(w, p)| w * p[0].abs().powf(b)).sum();
    if !psi_b.is_finite() {
        return divergent_report(NAME, Error::Divergent { what: "E_g[|psi|^beta]".into(), trace: vec![psi_b] });
    }
    let lhs = moment.powf(1.0 / a);
    let rhs = ed.abs() / psi_b.powf(1.0 / b);
    let h = (est.h)(theta);
    let s: Vec<f64> = model
        .points
        .iter()
        .map(|x| signed_power((est.t)(x) - h, a - 1.0))
        .collect();
    let y: Vec<f64> = field.psi.iter().map(|p| ed.signum() * p[0]).collect();
    let (c, resid) = l1_proportional_fit(&field.weight, &y, &s);
    Ok(VerificationReport::inequality(NAME, lhs, rhs, slack)
        .with("eta_dot", ed)
        .with("score_moment_beta", psi_b)
        .with("equality_c", c)
        .with("equality_residual", resid))
}

/// `J_g(θ) = E_g[ψ_g ψ_g^T]`.
pub fn fisher_matrix_g(model: &ParametricModel, theta: &[f64]) -> Result<DMatrix<f64>> {
    let field = score_field(model, theta)?;
    Ok(fisher_from_field(&field, model.dim_theta))
}

fn fisher_from_field(field: &ScoreField, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |a, b| {
        field.weight.iter().zip(&field.psi).map(|(w, p)| w * p[a] * p[b]).sum()
    })
}

/// Inverse of a symmetric positive definite matrix, or
/// [`Error::SingularMatrix`] with the eigenvector of the smallest
/// eigenvalue when that eigenvalue is below `1e-12` of the largest.
pub fn spd_inverse(j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(j.clone());
    let (imin, lmin) = eig.eigenvalues.argmin();
    let lmax = eig.eigenvalues.max();
    if !(lmin > 1e-12 * lmax.abs()) || lmax <= 0.0 {
        return Err(Error::SingularMatrix {
            direction: eig.eigenvectors.column(imin).iter().copied().collect(),
        });
    }
    let inv_d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    Ok(&eig.eigenvectors * inv_d * eig.eigenvectors.transpose())
}

/// Quadratic bound `E_g[|T-h|²] >= η̇^T J_g^{-1} η̇` (α = β = 2).
///
/// `equality_residual` measures `|T-h| ≈ c |η̇^T J_g^{-1} ψ_g|`.
pub fn crm_bound_quadratic(
    model: &ParametricModel,
    est: &EstimatorSpec,
    theta: &[f64],
    slack: f64,
) -> Result<VerificationReport> {
    if est.alpha != 2.0 {
        return Err(Error::InvalidParams(format!(
            "quadratic bound needs alpha = 2, got {}",
            est.alpha
        )));
    }
    let moment = error_moment(model, est, theta)?;
    let ed = eta_dot(model, est, theta)?;
    let field = score_field(model, theta)?;
    let jinv = spd_inverse(&fisher_from_field(&field, model.dim_theta))?;
    let u = &jinv * &ed;
    let rhs = ed.dot(&u);
    let h = (est.h)(theta);
    let e: Vec<f64> = model.points.iter().map(|x| ((est.t)(x) - h).abs()).collect();
    let v: Vec<f64> = field
        .psi
        .iter()
        .map(|p| p.iter().zip(u.iter()).map(|(a, b)| a * b).sum::<f64>().abs())
        .collect();
    let (c, resid) = l1_proportional_fit(&field.weight, &e, &v);
    Ok(VerificationReport::inequality("quadratic Cramér-Rao", moment, rhs, slack)
        .with("equality_c", c)
        .with("equality_residual", resid))
}

/// Objective `η̇^T A η̇ / E_g[|η̇^T A ψ_g|^β]^(1/β)` for a positive
/// definite `A`; every value is a lower bound on `E_g[|T-h|^α]^(1/α)`.
pub fn crm_bound_general(
    model: &ParametricModel,
    est: &EstimatorSpec,
    theta: &[f64],
    a: &DMatrix<f64>,
) -> Result<f64> {
    let ed = eta_dot(model, est, theta)?;
    let field = score_field(model, theta)?;
    general_objective(&field, &ed, a, est.beta())
}

fn general_objective(field: &ScoreField, ed: &DVector<f64>, a: &DMatrix<f64>, beta: f64) -> Result<f64> {
    let k = ed.len();
    if a.nrows() != k || a.ncols() != k {
        return Err(Error::InvalidParams(format!("A must be {k}x{k}")));
    }
    let sym = (a - a.transpose()).abs().max() <= 1e-12 * a.abs().max();
    if !sym || a.clone().cholesky().is_none() {
        return Err(Error::InvalidParams("A must be symmetric positive definite".into()));
    }
    let u = a * ed;
    let num = ed.dot(&u);
    let den: f64 = field
        .weight
        .iter()
        .zip(&field.psi)
        .map(|(w, p)| w * p.iter().zip(u.iter()).map(|(x, y)| x * y).sum::<f64>().abs().powf(beta))
        .sum();
    if !(den.is_finite() && den > 0.0) {
        return Err(Error::Divergent {
            what: "denominator of the matrix bound".into(),
            trace: vec![den],
        });
    }
    Ok(num / den.powf(1.0 / beta))
}

/// Compare the matrix-bound objective at `A = J_g^{-1}` against `count`
/// random positive definite matrices `A = B B^T + I/10` (entries of `B`
/// standard normal, stream `i` of `seed` for matrix `i`). The report has
/// `lhs` = value at `J_g^{-1}` and `rhs` = best random value.
pub fn a_sweep(
    model: &ParametricModel,
    est: &EstimatorSpec,
    theta: &[f64],
    count: usize,
    seed: u64,
    slack: f64,
) -> Result<VerificationReport> {
    let k = model.dim_theta;
    let ed = eta_dot(model, est, theta)?;
    let field = score_field(model, theta)?;
    let jinv = spd_inverse(&fisher_from_field(&field, k))?;
    let at_j = general_objective(&field, &ed, &jinv, est.beta())?;
    let values = (0..count)
        .map(|i| {
            let mut rng = shard_rng(seed, i as u64);
            let b = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = &b * b.transpose() + DMatrix::identity(k, k) * 0.1;
            general_objective(&field, &ed, &a, est.beta())
        })
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let closed = if est.alpha == 2.0 { ed.dot(&(&jinv * &ed)).sqrt() } else { f64::NAN };
    Ok(VerificationReport::inequality("matrix bound sweep", at_j, best, slack)
        .with("random_matrices", count as f64)
        .with("closed_form", closed))
}

/// Monte Carlo estimate with its jackknife standard error (`None` for a
/// single trial).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub trials: usize,
}

/// `E_g[|T(X) - h(θ)|^α]^(1/α)` from `trials` draws of `g`.
pub fn mc_error_moment(
    model: &ParametricModel,
    est: &EstimatorSpec,
    theta: &[f64],
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    model.check_theta(theta)?;
    let sampler = model
        .sampler
        .as_ref()
        .ok_or_else(|| Error::InvalidParams(format!("model {} has no sampler", model.name)))?;
    if trials == 0 {
        return Err(Error::InvalidParams("at least one trial is needed".into()));
    }
    let h = (est.h)(theta);
    let a = est.alpha;
    let draws = sampler(theta, seed, trials);
    let e: Vec<f64> = par::map_slice(&draws, |x| ((est.t)(x) - h).abs().powf(a));
    let n = e.len() as f64;
    let sum: f64 = e.iter().sum();
    let value = (sum / n).powf(1.0 / a);
    let std_error = (e.len() >= 2).then(|| {
        let loo: Vec<f64> = e.iter().map(|ei| ((sum - ei) / (n - 1.0)).powf(1.0 / a)).collect();
        let mean = loo.iter().sum::<f64>() / n;
        ((n - 1.0) / n * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
    });
    Ok(McEstimate {
        value,
        std_error,
        trials,
    })
}

/// Standard-normal draws in `dim` dimensions shifted by `mean` and scaled
/// by `sigma`.
pub fn gaussian_draws(mean: &[f64], sigma: f64, seed: u64, count: usize) -> Vec<Vec<f64>> {
    sharded_draws(seed, count, |rng| {
        mean.iter().map(|m| m + sigma * rng.sample::<f64, _>(StandardNormal)).collect()
    })
}

/// The q-Cramér–Rao product `q E_g[||X||^α]^(1/α) I_{β,q}[g]^(1/β)`, at
/// least `n` for every density, with equality at q-Gaussians of the same
/// `(q, α)`.
///
/// The dual norm measures the gradient. A density with nonzero mean is
/// recentred first (noted in the report). Diagnostics include
/// `product_q_beta`, the same product with `q^β` in place of `q`, and
/// its ratio `q^(β-1)` to the reported product.
pub fn qcr_product(g: &GridDensity, q: f64, alpha: f64, norm: Norm, slack: f64) -> Result<VerificationReport> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParams(format!("alpha={alpha} must be > 1")));
    }
    let beta = alpha / (alpha - 1.0);
    let n = g.dim() as f64;
    let mean = g.mean()?;
    let shift = mean.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let centred;
    let g = if shift > 1e-12 {
        centred = g.translated(&mean.iter().map(|m| -m).collect::<Vec<_>>())?;
        &centred
    } else {
        g
    };
    let moment = g.expectation(|x| norm.eval(x).powf(alpha))?;
    let fisher = match i_fisher_with_norm(g, q, beta, norm.dual()) {
        Ok(v) if v.is_finite() => v,
        Ok(v) => return divergent_report("q-Cramér-Rao", Error::Divergent { what: "I_(beta,q)".into(), trace: vec![v] }),
        Err(e) => return divergent_report("q-Cramér-Rao", e),
    };
    let base = moment.powf(1.0 / alpha) * fisher.powf(1.0 / beta);
    let product = q * base;
    let mut report = VerificationReport::inequality("q-Cramér-Rao", product, n, slack)
        .with("moment_alpha", moment)
        .with("fisher_i", fisher)
        .with("product_q_beta", q.powf(beta) * base)
        .with("q_beta_factor", q.powf(beta - 1.0));
    if shift > 1e-12 {
        report = report.note(format!("recentred by {mean:?}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
