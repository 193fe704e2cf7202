//! Self-similar (Barenblatt) solutions of `df/dt = div(|∇f^m|^(β-2) ∇f^m)`.

use serde::{Deserialize, Serialize};

use super::QGaussianParams;
use crate::error::{Error, Result};
use crate::numerics::{solve_positive, Axis, Geometry, GridDensity};

/// Exponents `(m, β, n)` of the doubly nonlinear equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    m: f64,
    beta: f64,
    dim: usize,
}

impl DiffusionParams {
    pub fn new(m: f64, beta: f64, dim: usize) -> Result<Self> {
        if !(m.is_finite() && m > 0.0 && beta.is_finite() && beta > 1.0 && dim >= 1) {
            return Err(Error::InvalidParams(format!(
                "diffusion needs m > 0, beta > 1, n >= 1; got m={m}, beta={beta}, n={dim}"
            )));
        }
        let p = DiffusionParams { m, beta, dim };
        let existence = m * (beta - 1.0) + beta / dim as f64 - 1.0;
        if p.delta() <= 0.0 || existence <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "no self-similar solution: delta = {} and m(beta-1)+beta/n-1 = {existence}",
                p.delta()
            )));
        }
        Ok(p)
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Hölder conjugate `α = β/(β-1)`.
    pub fn alpha(&self) -> f64 {
        self.beta / (self.beta - 1.0)
    }
    /// Entropic index `q = m + 1 - α/β` paired with this flow.
    pub fn q(&self) -> f64 {
        self.m + 1.0 - self.alpha() / self.beta
    }
    /// Similarity exponent `δ = n(β-1)m + β - n`.
    pub fn delta(&self) -> f64 {
        let n = self.dim as f64;
        n * (self.beta - 1.0) * self.m + self.beta - n
    }

    pub fn is_q_one(&self) -> bool {
        (self.q() - 1.0).abs() < 1e-12
    }

    /// Coefficient `k` of the profile `B(x) = (C - k|x|^α)_+^(1/(q-1))`,
    /// or of `C exp(-k|x|^α)` when `q = 1`.
    ///
    /// Substituting the similarity ansatz gives
    /// `(m k α / (q-1))^(β-1) = 1/δ`, i.e.
    /// `k = (m(β-1)-1) / (m β) · δ^(-1/(β-1))`, and in the limit `q = 1`
    /// `k = (β-1)^2 / β^α`.
    pub fn k(&self) -> f64 {
        let b = self.beta;
        if self.is_q_one() {
            (b - 1.0).powi(2) / b.powf(self.alpha())
        } else {
            (self.m * (b - 1.0) - 1.0) / (self.m * b) * (1.0 / self.delta()).powf(1.0 / (b - 1.0))
        }
    }

    /// Profile `B(ξ)` at `|ξ| = r` with free constant `c`.
    pub fn profile(&self, c: f64, r: f64) -> f64 {
        let ra = self.k() * r.abs().powf(self.alpha());
        if self.is_q_one() {
            c * (-ra).exp()
        } else {
            let base = c - ra;
            if base <= 0.0 {
                0.0
            } else {
                base.powf(1.0 / (self.q() - 1.0))
            }
        }
    }

    /// Write `B` as `scale · w(r)` with `w` the unnormalized profile of a
    /// q-Gaussian (same q, α = β/(β-1)).
    pub fn profile_as_qgaussian(&self, c: f64) -> Result<(f64, QGaussianParams)> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("Barenblatt constant {c} <= 0")));
        }
        if self.is_q_one() {
            let g = QGaussianParams::new(1.0, self.alpha(), self.k(), self.dim)?;
            return Ok((c, g));
        }
        let q = self.q();
        let gamma = self.k() / (c * (q - 1.0));
        let g = QGaussianParams::new(q, self.alpha(), gamma, self.dim)?;
        Ok((c.powf(1.0 / (q - 1.0)), g))
    }

    /// `∫ B(x) dx` for the constant `c`.
    pub fn mass(&self, c: f64) -> Result<f64> {
        let (scale, g) = self.profile_as_qgaussian(c)?;
        Ok(scale * g.normalization()?)
    }

    /// The constant `C` giving unit mass, by root finding on `C ↦ mass(C)`.
    pub fn barenblatt_mass_constant(&self) -> Result<f64> {
        let c = solve_positive(|c| self.mass(c).map_or(f64::NAN, |m| m - 1.0), 1.0, 1e-15)?;
        let mass = self.mass(c)?;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::RootFinding {
                lo: c,
                hi: c,
                reason: format!("mass {mass} after convergence"),
            });
        }
        Ok(c)
    }

    /// `f(x, t) = t^(-n/δ) B(x t^(-1/δ))`.
    pub fn barenblatt(&self, c: f64, x: &[f64], t: f64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParams(format!("Barenblatt time t={t} must be > 0")));
        }
        let n = self.dim as f64;
        let d = self.delta();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(t.powf(-n / d) * self.profile(c, r * t.powf(-1.0 / d)))
    }

    /// Support radius of the solution at time `t` (`None` when `q <= 1`).
    pub fn support_radius(&self, c: f64, t: f64) -> Option<f64> {
        (self.q() > 1.0 + 1e-12)
            .then(|| (c / self.k()).powf(1.0 / self.alpha()) * t.powf(1.0 / self.delta()))
    }

    /// Sample the solution at time `t` on `axis` (cartesian for n = 1,
    /// radial otherwise).
    pub fn grid(&self, c: f64, t: f64, axis: Axis) -> Result<GridDensity> {
        if t <= 0.0 {
            return Err(Error::InvalidParams(format!("Barenblatt time t={t} must be > 0")));
        }
        let geometry = if self.dim == 1 {
            Geometry::Cartesian
        } else {
            Geometry::Radial { dim: self.dim }
        };
        GridDensity::from_fn(geometry, vec![axis], |x| {
            self.barenblatt(c, x, t).unwrap_or(0.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derived_exponents() {
        let p = DiffusionParams::new(2.0, 2.0, 1).unwrap();
        assert_eq!(p.alpha(), 2.0);
        assert_eq!(p.q(), 2.0);
        assert_eq!(p.delta(), 3.0);
        assert!((p.k() - 1.0 / 12.0).abs() < 1e-15);
        let pl = DiffusionParams::new(1.0, 3.0, 1).unwrap();
        assert_eq!(pl.alpha(), 1.5);
        assert_eq!(pl.q(), 1.5);
        assert_eq!(pl.delta(), 4.0);
        assert!((1.0 / pl.alpha() + 1.0 / pl.beta() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_exponents() {
        assert!(DiffusionParams::new(0.1, 2.0, 3).is_err());
        assert!(DiffusionParams::new(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn heat_kernel_branch() {
        let p = DiffusionParams::new(1.0, 2.0, 1).unwrap();
        assert!(p.is_q_one());
        let c = p.barenblatt_mass_constant().unwrap();
        assert!((c - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-12);
        for &(x, t) in &[(0.0f64, 1.0f64), (1.3, 0.7), (-2.0, 2.5)] {
            let exact = (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
            assert!((p.barenblatt(c, &[x], t).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn porous_medium_support_and_mass() {
        let p = DiffusionParams::new(2.0, 2.0, 1).unwrap();
        let c = p.barenblatt_mass_constant().unwrap();
        // ∫ (C - k x^2)_+ dx = 4 C^(3/2) / (3 sqrt k)
        let k = p.k();
        assert!((4.0 * c.powf(1.5) / (3.0 * k.sqrt()) - 1.0).abs() < 1e-10);
        let t = 1.7;
        let edge = p.support_radius(c, t).unwrap();
        assert!((edge - (c / k).sqrt() * t.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(p.barenblatt(c, &[edge * 1.001], t).unwrap(), 0.0);
        assert!(p.barenblatt(c, &[edge * 0.999], t).unwrap() > 0.0);
    }

    #[test]
    fn self_similar_scaling() {
        let p = DiffusionParams::new(2.0, 2.0, 1).unwrap();
        let c = p.barenblatt_mass_constant().unwrap();
        let (n, d) = (1.0, p.delta());
        for x in [0.0, 0.4, 1.1, 2.0] {
            let lhs = p.barenblatt(c, &[x], 4.0).unwrap();
            let rhs = 4f64.powf(-n / d) * p.barenblatt(c, &[x * 4f64.powf(-1.0 / d)], 1.0).unwrap();
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_time_rejected() {
        let p = DiffusionParams::new(2.0, 2.0, 1).unwrap();
        assert!(p.barenblatt(1.0, &[0.0], 0.0).is_err());
    }

    #[test]
    fn mass_is_monotone_in_constant() {
        for (m, b) in [(2.0, 2.0), (1.0, 3.0), (1.0, 2.0), (3.0, 2.5)] {
            let p = DiffusionParams::new(m, b, 1).unwrap();
            for c in [0.01, 0.3, 1.0, 5.0] {
                assert!(p.mass(2.0 * c).unwrap() > p.mass(c).unwrap());
            }
        }
    }

    #[test]
    fn unit_mass_by_quadrature() {
        for (m, b, n) in [(2.0, 2.0, 1), (1.0, 3.0, 1), (1.5, 2.0, 2), (0.8, 2.0, 1)] {
            let p = DiffusionParams::new(m, b, n).unwrap();
            let c = p.barenblatt_mass_constant().unwrap();
            let (_, g) = p.profile_as_qgaussian(c).unwrap();
            let r = g.truncation_radius(1e-12).unwrap() * 1.05;
            let grid = if n == 1 {
                p.grid(c, 1.0, Axis::symmetric(r, 200_001).unwrap()).unwrap()
            } else {
                p.grid(c, 1.0, Axis::new(0.0, r, 100_001).unwrap()).unwrap()
            };
            assert!((grid.integrate().unwrap() - 1.0).abs() < 1e-8, "m={m} beta={b}");
        }
    }

    #[test]
    fn profile_is_a_qgaussian() {
        let p = DiffusionParams::new(1.0, 3.0, 1).unwrap();
        let c = p.barenblatt_mass_constant().unwrap();
        let (_, g) = p.profile_as_qgaussian(c).unwrap();
        // unit mass: B equals the normalized q-Gaussian pointwise
        for x in [0.0, 0.3, 1.0, 2.2, 3.5] {
            let b = p.barenblatt(c, &[x], 1.0).unwrap();
            assert!((b - g.pdf(&[x]).unwrap()).abs() < 1e-12);
        }
        assert_eq!(g.q(), p.q());
        assert_eq!(g.alpha(), p.alpha());
    }
}
