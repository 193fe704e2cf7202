//! The generalized q-Gaussian family
//! `G(x) ∝ (1 - (q-1) γ ||x||^α)_+^(1/(q-1))` (with `exp(-γ ||x||^α)` at
//! `q = 1`) and the self-similar Barenblatt solutions of the doubly
//! nonlinear diffusion equation.
//!
//! Every functional of a q-Gaussian reduces to the radial integral
//! `∫_0^∞ r^(s-1) w(r)^c dr` of the unnormalized profile `w`, which has a
//! Beta/Gamma closed form; see [`QGaussianParams::radial_integral`].

mod barenblatt;
mod sampler;

pub use barenblatt::DiffusionParams;
pub use sampler::{shard_rng, sharded_draws, RadialSampler};

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{digamma, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::quadrature::unit_sphere_area;
use crate::numerics::{brent, Axis, Geometry, GridDensity};

/// Parameters `(q, α, γ, n)` of a generalized q-Gaussian on R^n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct QGaussianParams {
    q: f64,
    alpha: f64,
    gamma: f64,
    dim: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct RawParams {
    q: f64,
    alpha: f64,
    gamma: f64,
    dim: usize,
}

impl TryFrom<RawParams> for QGaussianParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        QGaussianParams::new(r.q, r.alpha, r.gamma, r.dim)
    }
}

impl From<QGaussianParams> for RawParams {
    fn from(p: QGaussianParams) -> Self {
        RawParams {
            q: p.q,
            alpha: p.alpha,
            gamma: p.gamma,
            dim: p.dim,
        }
    }
}

impl QGaussianParams {
    pub fn new(q: f64, alpha: f64, gamma: f64, dim: usize) -> Result<Self> {
        let finite = q.is_finite() && alpha.is_finite() && gamma.is_finite();
        if !finite || q <= 0.0 || alpha <= 1.0 || gamma <= 0.0 || dim == 0 {
            return Err(Error::InvalidParams(format!(
                "q-Gaussian needs q > 0, alpha > 1, gamma > 0, n >= 1; got q={q}, alpha={alpha}, gamma={gamma}, n={dim}"
            )));
        }
        if q < 1.0 && alpha / (1.0 - q) <= dim as f64 {
            return Err(Error::InvalidParams(format!(
                "q-Gaussian with q={q} < 1 is not integrable: alpha/(1-q) = {} <= n = {dim}",
                alpha / (1.0 - q)
            )));
        }
        Ok(QGaussianParams {
            q,
            alpha,
            gamma,
            dim,
        })
    }

    /// The standard normal on R^n as a member of the family.
    pub fn standard_normal(dim: usize) -> Self {
        QGaussianParams::new(1.0, 2.0, 0.5, dim).expect("valid")
    }

    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Hölder conjugate of α.
    pub fn beta(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        QGaussianParams::new(self.q, self.alpha, gamma, self.dim)
    }

    fn is_gaussian_branch(&self) -> bool {
        self.q == 1.0
    }

    /// Unnormalized radial profile `w(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        let ra = self.gamma * r.abs().powf(self.alpha);
        if self.is_gaussian_branch() {
            (-ra).exp()
        } else {
            let base = 1.0 - (self.q - 1.0) * ra;
            // the last 1e-12 before the edge is roundoff in `ra`
            if base <= 1e-12 {
                0.0
            } else {
                base.powf(1.0 / (self.q - 1.0))
            }
        }
    }

    /// Radius of the support (`None` for full support, `q <= 1`).
    pub fn support_radius(&self) -> Option<f64> {
        (self.q > 1.0).then(|| ((self.q - 1.0) * self.gamma).powf(-1.0 / self.alpha))
    }

    /// `∫_0^∞ r^(s-1) w(r)^c dr` in closed form.
    pub fn radial_integral(&self, s: f64, c: f64) -> Result<f64> {
        let (q, a) = (self.q, self.alpha);
        let divergent = |why: String| Error::Divergent {
            what: why,
            trace: Vec::new(),
        };
        if s <= 0.0 {
            return Err(divergent(format!("radial integral with r-exponent {s} <= 0")));
        }
        let sa = s / a;
        if self.is_gaussian_branch() {
            if c <= 0.0 {
                return Err(divergent(format!("exp profile raised to power {c} <= 0")));
            }
            return Ok((ln_gamma(sa) - sa * (c * self.gamma).ln()).exp() / a);
        }
        if q > 1.0 {
            let p = c / (q - 1.0) + 1.0;
            if p <= 0.0 {
                return Err(divergent(format!(
                    "boundary singularity: (1-(q-1)γr^α)^{} not integrable",
                    p - 1.0
                )));
            }
            let lnk = (q - 1.0) * self.gamma;
            Ok((ln_beta(sa, p) - sa * lnk.ln()).exp() / a)
        } else {
            let p = c / (1.0 - q);
            if p <= sa {
                return Err(divergent(format!(
                    "power tail: r^{} times profile^{c} not integrable (need c/(1-q) > s/alpha)",
                    s - 1.0
                )));
            }
            let b = (1.0 - q) * self.gamma;
            Ok((ln_beta(sa, p - sa) - sa * b.ln()).exp() / a)
        }
    }

    /// Normalizing constant `Z = ∫ w(||x||) dx`.
    pub fn normalization(&self) -> Result<f64> {
        Ok(unit_sphere_area(self.dim) * self.radial_integral(self.dim as f64, 1.0)?)
    }

    /// Same constant by quadrature on a fine radial grid (cross-check).
    pub fn normalization_by_quadrature(&self, points: usize) -> Result<f64> {
        let r_max = self.truncation_radius(1e-15)?;
        let g = GridDensity::radial(self.dim, r_max, points | 1, |r| self.profile(r))?;
        g.integrate()
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.profile(r) / self.normalization()?)
    }

    /// `E[||X||^s]`.
    pub fn radial_moment(&self, s: f64) -> Result<f64> {
        let n = self.dim as f64;
        let num = self.radial_integral(n + s, 1.0).map_err(|e| match e {
            Error::Divergent { what, trace } => Error::Divergent {
                what: format!("moment of order {s} diverges: {what}"),
                trace,
            },
            e => e,
        })?;
        Ok(num / self.radial_integral(n, 1.0)?)
    }

    /// `m_α = E[||X||^α]`.
    pub fn moment_alpha(&self) -> Result<f64> {
        if self.q < 1.0 && self.alpha / (1.0 - self.q) <= self.dim as f64 + self.alpha {
            return Err(Error::Divergent {
                what: format!(
                    "alpha-moment needs alpha/(1-q) > n + alpha; got {} <= {}",
                    self.alpha / (1.0 - self.q),
                    self.dim as f64 + self.alpha
                ),
                trace: Vec::new(),
            });
        }
        self.radial_moment(self.alpha)
    }

    /// `M_r[G] = ∫ G^r`.
    pub fn m_q_exact(&self, r: f64) -> Result<f64> {
        let z = self.normalization()?;
        Ok(z.powf(-r) * unit_sphere_area(self.dim) * self.radial_integral(self.dim as f64, r)?)
    }

    /// Shannon entropy `-∫ G ln G`.
    pub fn shannon_exact(&self) -> Result<f64> {
        let z = self.normalization()?;
        let n = self.dim as f64;
        if self.is_gaussian_branch() {
            return Ok(z.ln() + self.gamma * self.moment_alpha()?);
        }
        // E[ln w] = d/dc ln ∫ r^(n-1) w^c dr at c = 1
        let (q, a) = (self.q, self.alpha);
        let e_ln_w = if q > 1.0 {
            let p = 1.0 / (q - 1.0) + 1.0;
            (digamma(p) - digamma(n / a + p)) / (q - 1.0)
        } else {
            let p = 1.0 / (1.0 - q);
            -(digamma(p) - digamma(p - n / a)) / (1.0 - q)
        };
        Ok(z.ln() - e_ln_w)
    }

    /// Rényi entropy `H_r[G]` (Shannon at `r = 1`).
    pub fn renyi_exact(&self, r: f64) -> Result<f64> {
        if r == 1.0 {
            self.shannon_exact()
        } else {
            Ok(self.m_q_exact(r)?.ln() / (1.0 - r))
        }
    }

    /// Entropy power `N_r[G] = exp((2/n) H_r[G])`.
    pub fn entropy_power_exact(&self, r: f64) -> Result<f64> {
        Ok((2.0 / self.dim as f64 * self.renyi_exact(r)?).exp())
    }

    /// `φ_{β,r}[G] = ∫ G^(β(r-1)+1-β) |∇G|^β`.
    pub fn phi_fisher_exact(&self, r: f64, beta: f64) -> Result<f64> {
        let z = self.normalization()?;
        let n = self.dim as f64;
        let (a, g) = (self.alpha, self.gamma);
        // |w'| = γα r^(α-1) w^(2-q), so the integrand is a pure power of w
        let s = n + beta * (a - 1.0);
        let c = beta * (r - self.q) + 1.0;
        let radial = self.radial_integral(s, c)?;
        Ok(z.powf(-(beta * (r - 1.0) + 1.0))
            * (g * a).powf(beta)
            * unit_sphere_area(self.dim)
            * radial)
    }

    /// `I_{β,r}[G] = φ_{β,r}[G] / M_r[G]^β`.
    pub fn i_fisher_exact(&self, r: f64, beta: f64) -> Result<f64> {
        Ok(self.phi_fisher_exact(r, beta)? / self.m_q_exact(r)?.powf(beta))
    }

    /// Parameters of the escort `G^(1/r) / ∫ G^(1/r)`, itself a q-Gaussian.
    pub fn escort(&self, r: f64) -> Result<QGaussianParams> {
        if r <= 0.0 {
            return Err(Error::InvalidParams(format!("escort order {r} <= 0")));
        }
        if self.is_gaussian_branch() {
            return QGaussianParams::new(1.0, self.alpha, self.gamma / r, self.dim);
        }
        let q_new = 1.0 + (self.q - 1.0) * r;
        QGaussianParams::new(q_new, self.alpha, self.gamma / r, self.dim).map_err(|e| {
            Error::Divergent {
                what: format!("escort of order {r} is not normalizable: {e}"),
                trace: Vec::new(),
            }
        })
    }

    /// Radius beyond which the probability mass is below `tail`.
    pub fn truncation_radius(&self, tail: f64) -> Result<f64> {
        if let Some(r) = self.support_radius() {
            return Ok(r);
        }
        let n = self.dim as f64;
        let a = self.alpha;
        if self.is_gaussian_branch() {
            // P(||X|| > R) = Q(n/α, γ R^α)
            let f = |r: f64| {
                if r <= 0.0 {
                    1.0 - tail
                } else {
                    gamma_ur(n / a, self.gamma * r.powf(a)) - tail
                }
            };
            let scale = self.gamma.powf(-1.0 / a);
            let mut hi = scale;
            while f(hi) > 0.0 {
                hi *= 2.0;
            }
            return brent(f, 0.0, hi, 1e-12 * hi, 200);
        }
        // power tail bound: w <= (b r^α)^(-p)
        let p = 1.0 / (1.0 - self.q);
        let b = (1.0 - self.q) * self.gamma;
        let z = self.normalization()?;
        let coef = unit_sphere_area(self.dim) * b.powf(-p) / ((a * p - n) * z);
        Ok((tail / coef).powf(1.0 / (n - a * p)))
    }

    /// Sample the density on a grid.
    ///
    /// `half_nodes` is the number of intervals between the origin and the
    /// support edge (compact case) or the truncation radius (`tail` mass
    /// left outside). Heavy tails keep the step at most 1/`half_nodes` of
    /// eight scale lengths so the core stays resolved. For compact support
    /// the edge `||x|| = R` falls on an even node so no Simpson panel
    /// straddles the kink. One-dimensional densities get a symmetric
    /// cartesian grid, higher dimensions a radial grid.
    pub fn grid(&self, half_nodes: usize, tail: f64) -> Result<GridDensity> {
        let k = (half_nodes.max(4) + 1) & !1;
        let (h, total) = match self.support_radius() {
            Some(r) => {
                let margin = ((k / 10).max(2) + 1) & !1;
                (r / k as f64, k + margin)
            }
            None => {
                // heavy tails: resolve the core at the requested density and
                // extend the grid out to the truncation radius
                let r = self.truncation_radius(tail)?;
                let core = 8.0 * self.gamma.powf(-1.0 / self.alpha);
                let h = r.min(core) / k as f64;
                let total = (((r / h).ceil() as usize) + 1) & !1;
                (h, total)
            }
        };
        let z = self.normalization()?;
        let half = h * total as f64;
        // nodes on the support edge are exactly zero
        let edge = self.support_radius().map_or(f64::INFINITY, |r| r * (1.0 - 1e-12));
        let f = |x: &[f64]| {
            if x[0].abs() >= edge {
                0.0
            } else {
                self.profile(x[0]) / z
            }
        };
        if self.dim == 1 {
            let axis = Axis::new(-half, half, 2 * total + 1)?;
            // symmetric node placement
            GridDensity::from_fn(Geometry::Cartesian, vec![axis], |x| {
                f(&[x[0].abs()])
            })
        } else {
            let axis = Axis::new(0.0, half, total + 1)?;
            GridDensity::from_fn(Geometry::Radial { dim: self.dim }, vec![axis], f)
        }
    }

    /// Sampler for i.i.d. draws.
    pub fn sampler(&self) -> Result<RadialSampler> {
        RadialSampler::new(self)
    }

    /// `count` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
        Ok(self.sampler()?.sample(seed, count))
    }
}
