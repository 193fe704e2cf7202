//! Information functionals of grid densities: the information generating
//! function `M_q`, Tsallis/Rényi/Shannon entropies, the entropy power
//! `N_q`, the generalized Fisher informations `φ_{β,q}` and `I_{β,q}`, and
//! escort transforms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gradient, GridDensity, Norm};

/// Below this distance from `q = 1` the entropies use their `q = 1`
/// limits; `(M_q - 1)/(1 - q)` cancels catastrophically nearer than that.
pub const Q_ONE_EPS: f64 = 1e-6;

fn near_one(q: f64) -> bool {
    (q - 1.0).abs() < Q_ONE_EPS
}

/// `M_q[f] = ∫ f^q` (`M_0` is the support volume).
pub fn m_q(f: &GridDensity, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::InvalidParams(format!("M_q needs q >= 0, got {q}")));
    }
    f.integrate_fn(|_, v| if v > 0.0 { v.powf(q) } else { 0.0 })
}

/// `-∫ f ln f`.
pub fn shannon_entropy(f: &GridDensity) -> Result<f64> {
    f.integrate_fn(|_, v| if v > 0.0 { -v * v.ln() } else { 0.0 })
}

/// `S_q[f] = (M_q[f] - 1)/(1 - q)`; Shannon entropy at `q = 1`.
pub fn tsallis_entropy(f: &GridDensity, q: f64) -> Result<f64> {
    if near_one(q) {
        return shannon_entropy(f);
    }
    Ok((m_q(f, q)? - 1.0) / (1.0 - q))
}

/// `H_q[f] = ln M_q[f] / (1 - q)`; Shannon entropy at `q = 1`.
pub fn renyi_entropy(f: &GridDensity, q: f64) -> Result<f64> {
    if near_one(q) {
        return shannon_entropy(f);
    }
    Ok(m_q(f, q)?.ln() / (1.0 - q))
}

/// Entropy power `N_q[f] = M_q[f]^((2/n)/(1-q)) = exp((2/n) H_q[f])`.
///
/// Both expressions are evaluated; a disagreement beyond 1e-10 relative is
/// reported as an error.
pub fn entropy_power(f: &GridDensity, q: f64) -> Result<f64> {
    let n = f.dim() as f64;
    if near_one(q) {
        return Ok((2.0 / n * shannon_entropy(f)?).exp());
    }
    let mq = m_q(f, q)?;
    let direct = mq.powf(2.0 / n / (1.0 - q));
    let via_renyi = (2.0 / n * (mq.ln() / (1.0 - q))).exp();
    if ((direct - via_renyi) / via_renyi).abs() > 1e-10 {
        return Err(Error::InvalidParams(format!(
            "entropy power forms disagree: {direct} vs {via_renyi}"
        )));
    }
    Ok(direct)
}

/// `φ_{β,q}[f] = ∫ f^(β(q-1)+1) (|∇f|/f)^β` with the Euclidean norm.
pub fn phi_fisher(f: &GridDensity, q: f64, beta: f64) -> Result<f64> {
    phi_fisher_with_norm(f, q, beta, Norm::Euclidean)
}

/// `φ_{β,q}` with `|∇f|` measured in `norm`.
///
/// The integrand is evaluated as `f^(β(q-1)+1-β) |∇f|^β` so no `0/0`
/// appears at the support edge; nodes with `f = 0` contribute nothing.
pub fn phi_fisher_with_norm(f: &GridDensity, q: f64, beta: f64, norm: Norm) -> Result<f64> {
    if !(beta > 1.0) || !(q > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Fisher information needs beta > 1 and q > 0, got beta={beta}, q={q}"
        )));
    }
    let grad = gradient(f);
    let e = beta * (q - 1.0) + 1.0 - beta;
    let integrand: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                v.powf(e) * norm.eval(&grad.at(i)).powf(beta)
            } else {
                0.0
            }
        })
        .collect();
    f.integrate_nodes(&integrand)
}

/// `I_{β,q}[f] = φ_{β,q}[f] / M_q[f]^β`.
pub fn i_fisher(f: &GridDensity, q: f64, beta: f64) -> Result<f64> {
    i_fisher_with_norm(f, q, beta, Norm::Euclidean)
}

pub fn i_fisher_with_norm(f: &GridDensity, q: f64, beta: f64, norm: Norm) -> Result<f64> {
    let phi = phi_fisher_with_norm(f, q, beta, norm)?;
    if q == 1.0 {
        return Ok(phi);
    }
    Ok(phi / m_q(f, q)?.powf(beta))
}

/// Ratio between successive refinements above which the Fisher integral is
/// declared divergent.
pub const DIVERGENCE_RATIO: f64 = 1.5;

/// `φ_{β,q}` evaluated at three successive grid refinements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedFisher {
    pub trace: Vec<f64>,
    pub value: f64,
}

/// `φ_{β,q}` with divergence detection: `make(level)` must produce the
/// same density on a grid refined by a factor two per level. If the value
/// still grows by more than [`DIVERGENCE_RATIO`] between the last two
/// levels the integral is reported divergent with its refinement trace.
pub fn phi_fisher_refined<F>(make: F, q: f64, beta: f64) -> Result<RefinedFisher>
where
    F: Fn(usize) -> Result<GridDensity>,
{
    let trace = (0..3)
        .map(|level| phi_fisher(&make(level)?, q, beta))
        .collect::<Result<Vec<_>>>()?;
    let ratio = trace[2] / trace[1];
    if !trace[2].is_finite() || ratio > DIVERGENCE_RATIO {
        return Err(Error::Divergent {
            what: format!("phi_(beta={beta}, q={q}) grows under refinement"),
            trace,
        });
    }
    Ok(RefinedFisher {
        value: trace[2],
        trace,
    })
}

/// Escort density `f^(1/q) / ∫ f^(1/q)`.
///
/// A grid can only represent a finite escort integral; when the escort
/// does not decay to below 1e-8 of its peak at the outer edge of the grid
/// the integral is treated as divergent.
pub fn escort(f: &GridDensity, q: f64) -> Result<GridDensity> {
    if !(q > 0.0) {
        return Err(Error::InvalidParams(format!("escort order must be > 0, got {q}")));
    }
    if q == 1.0 {
        return Ok(f.clone());
    }
    let powered = f.map_values(|v| if v > 0.0 { v.powf(1.0 / q) } else { 0.0 })?;
    check_decay(&powered)?;
    powered.normalize()
}

/// Inverse escort `g^q / ∫ g^q`.
pub fn escort_inverse(g: &GridDensity, q: f64) -> Result<GridDensity> {
    if !(q > 0.0) {
        return Err(Error::InvalidParams(format!("escort order must be > 0, got {q}")));
    }
    if q == 1.0 {
        return Ok(g.clone());
    }
    g.map_values(|v| if v > 0.0 { v.powf(q) } else { 0.0 })?
        .normalize()
}

fn check_decay(f: &GridDensity) -> Result<()> {
    let peak = f.values().iter().fold(0.0f64, |m, &v| m.max(v));
    let edge = (0..f.len())
        .filter(|&i| {
            let idx = f.multi_index(i);
            idx.iter().zip(f.axes()).enumerate().any(|(k, (&j, a))| {
                let radial_origin = k == 0 && j == 0 && f.geometry() != crate::Geometry::Cartesian;
                !radial_origin && (j == 0 || j + 1 == a.points)
            })
        })
        .fold(0.0f64, |m, i| m.max(f.values()[i]));
    if edge > 1e-8 * peak {
        return Err(Error::Divergent {
            what: format!("escort does not decay inside the grid (edge/peak = {})", edge / peak),
            trace: Vec::new(),
        });
    }
    Ok(())
}

/// All functionals of one density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub m_q: f64,
    pub s_q: f64,
    pub h_q: f64,
    pub n_q: f64,
    pub phi: f64,
    pub i: f64,
    pub divergent: bool,
}

/// Evaluate every functional; `phi`/`i` come from the refinement sequence
/// produced by `make` (level 0 is the density itself).
pub fn summarize<F>(make: F, q: f64, beta: f64) -> Result<InfoSummary>
where
    F: Fn(usize) -> Result<GridDensity>,
{
    let f = make(0)?;
    let mq = m_q(&f, q)?;
    let (phi, divergent) = match phi_fisher_refined(&make, q, beta) {
        Ok(_) => (phi_fisher(&f, q, beta)?, false),
        Err(Error::Divergent { .. }) => (f64::INFINITY, true),
        Err(e) => return Err(e),
    };
    Ok(InfoSummary {
        m_q: mq,
        s_q: tsallis_entropy(&f, q)?,
        h_q: renyi_entropy(&f, q)?,
        n_q: entropy_power(&f, q)?,
        phi,
        i: if q == 1.0 { phi } else { phi / mq.powf(beta) },
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgaussian::QGaussianParams;
    use std::f64::consts::{E, PI};

    fn uniform(a: f64, b: f64) -> GridDensity {
        GridDensity::cartesian_1d(a, b, 1001, |_| 1.0 / (b - a)).unwrap()
    }

    fn gaussian(sigma: f64) -> GridDensity {
        GridDensity::cartesian_1d(-12.0 * sigma, 12.0 * sigma, 4801, |x| {
            (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
        })
        .unwrap()
    }

    fn parabola() -> GridDensity {
        QGaussianParams::new(2.0, 2.0, 1.0, 1)
            .unwrap()
            .grid(1000, 0.0)
            .unwrap()
    }

    #[test]
    fn generating_function_examples() {
        for q in [0.0, 0.5, 2.0, 3.7] {
            assert!((m_q(&uniform(0.0, 1.0), q).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((m_q(&uniform(0.0, 2.0), 2.0).unwrap() - 0.5).abs() < 1e-12);
        let g2 = m_q(&gaussian(1.0), 2.0).unwrap();
        assert!((g2 - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-8);
        assert!(m_q(&gaussian(1.0), -0.5).is_err());
        assert!((m_q(&gaussian(1.0), 1.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tsallis_examples() {
        assert!(tsallis_entropy(&uniform(0.0, 1.0), 2.0).unwrap().abs() < 1e-12);
        assert!((tsallis_entropy(&uniform(0.0, 2.0), 2.0).unwrap() - 0.5).abs() < 1e-12);
        let h = 0.5 * (2.0 * PI * E).ln();
        let g = gaussian(1.0);
        for q in [1.0 - 1e-5, 1.0 + 1e-5] {
            assert!((tsallis_entropy(&g, q).unwrap() - h).abs() < 1e-4);
        }
        assert!((tsallis_entropy(&g, 1.0).unwrap() - h).abs() < 1e-8);
    }

    #[test]
    fn renyi_examples() {
        for q in [0.0, 0.5, 2.0, 5.0] {
            assert!((renyi_entropy(&uniform(0.0, 2.0), q).unwrap() - 2f64.ln()).abs() < 1e-12);
        }
        let h = 0.5 * (2.0 * PI * E).ln();
        assert!((renyi_entropy(&gaussian(1.0), 1.0).unwrap() - h).abs() < 1e-8);
        // support volume of the parabola is 2, up to the quadrature error of
        // an indicator function
        let m0 = renyi_entropy(&parabola(), 0.0).unwrap();
        assert!((m0 - 2f64.ln()).abs() < 5e-3);
    }

    #[test]
    fn entropy_power_examples() {
        assert!((entropy_power(&gaussian(1.0), 1.0).unwrap() - 2.0 * PI * E).abs() < 1e-6);
        assert!((entropy_power(&uniform(0.0, 2.0), 2.0).unwrap() - 4.0).abs() < 1e-10);
        let f = parabola();
        let n = entropy_power(&f, 2.0).unwrap();
        let half = entropy_power(&f.dilated(0.5).unwrap(), 2.0).unwrap();
        assert!((half - n / 4.0).abs() < 1e-12);
    }

    #[test]
    fn classical_fisher_of_gaussians() {
        assert!((phi_fisher(&gaussian(1.0), 1.0, 2.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((phi_fisher(&gaussian(2.0), 1.0, 2.0).unwrap() - 0.25).abs() < 1e-6);
        let g = gaussian(1.0);
        assert_eq!(i_fisher(&g, 1.0, 2.0).unwrap(), phi_fisher(&g, 1.0, 2.0).unwrap());
    }

    #[test]
    fn parabola_fisher_closed_form() {
        // f = 3/4 (1 - x^2): φ_{2,2} = ∫ f f'^2 = (27/16)(2/3 - 2/5) = 9/20
        let f = parabola();
        let phi = phi_fisher(&f, 2.0, 2.0).unwrap();
        assert!((phi - 0.45).abs() < 1e-10, "{phi}");
        // M_2 = (9/16) ∫ (1-x^2)^2 = 3/5
        let i = i_fisher(&f, 2.0, 2.0).unwrap();
        assert!((i - 0.45 / 0.36).abs() < 1e-10);
    }

    #[test]
    fn fisher_matches_closed_form_across_family() {
        for (q, a, fq) in [(1.5, 2.0, 1.5), (2.0, 3.0, 2.0), (1.0, 2.0, 1.0), (1.0, 3.0, 1.0), (0.8, 2.0, 0.8), (1.5, 2.0, 1.2)] {
            let p = QGaussianParams::new(q, a, 1.0, 1).unwrap();
            let g = p.grid(4000, 1e-12).unwrap();
            let beta = a / (a - 1.0);
            let grid_val = phi_fisher(&g, fq, beta).unwrap();
            let exact = p.phi_fisher_exact(fq, beta).unwrap();
            assert!(((grid_val - exact) / exact).abs() < 1e-5, "q={q} a={a}: {grid_val} vs {exact}");
        }
    }

    #[test]
    fn fisher_translation_invariant() {
        let f = gaussian(1.3);
        let t = f.translated(&[2.7]).unwrap();
        let a = phi_fisher(&f, 1.0, 2.0).unwrap();
        let b = phi_fisher(&t, 1.0, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12);
        let p = parabola();
        let shifted = p.translated(&[-0.3]).unwrap();
        assert!((i_fisher(&p, 2.0, 2.0).unwrap() - i_fisher(&shifted, 2.0, 2.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn divergent_fisher_is_detected() {
        // q-Gaussian with q = 3 has f ~ u^(1/2) at its edge; with Fisher
        // index 0.5 the integrand behaves like u^(-2) there.
        let p = QGaussianParams::new(3.0, 2.0, 1.0, 1).unwrap();
        let make = |level: usize| p.grid(200 << level, 0.0);
        match phi_fisher_refined(make, 0.5, 2.0) {
            Err(Error::Divergent { trace, .. }) => {
                assert_eq!(trace.len(), 3);
                assert!(trace[2] > trace[1] && trace[1] > trace[0]);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        let ok = phi_fisher_refined(|l| p.grid(200 << l, 0.0), 3.0, 2.0).unwrap();
        assert!((ok.value - p.phi_fisher_exact(3.0, 2.0).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn escort_examples() {
        let g = gaussian(1.0);
        assert_eq!(escort(&g, 1.0).unwrap(), g);
        let e = escort(&g, 0.5).unwrap();
        let var = e.expectation(|x| x[0] * x[0]).unwrap();
        assert!((var - 0.5).abs() < 1e-6);
        let back = escort(&escort_inverse(&e, 0.5).unwrap(), 0.5).unwrap();
        for (a, b) in back.values().iter().zip(e.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        let f = escort_inverse(&e, 0.5).unwrap();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn escort_of_heavy_tail_is_rejected() {
        let p = QGaussianParams::new(0.7, 2.0, 1.0, 1).unwrap();
        let g = p.grid(2000, 1e-6).unwrap();
        assert!(matches!(escort(&g, 3.0), Err(Error::Divergent { .. })));
    }

    #[test]
    fn summary_of_uniform() {
        let s = summarize(|l| GridDensity::cartesian_1d(0.0, 1.0, 101 << l, |_| 1.0), 2.0, 2.0).unwrap();
        assert!(s.s_q.abs() < 1e-12);
        assert!(!s.divergent);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn entropy_power_forms_agree(q in 0.3f64..4.0, sigma in 0.3f64..3.0) {
            prop_assume!((q - 1.0).abs() > 1e-3);
            let f = gaussian(sigma);
            let n = entropy_power(&f, q).unwrap();
            let alt = (2.0 * renyi_entropy(&f, q).unwrap()).exp();
            prop_assert!(((n - alt) / alt).abs() < 1e-10);
        }

        #[test]
        fn tsallis_sign_coherence(q in 0.2f64..4.0, a in 1.3f64..4.0, qq in 0.9f64..2.0) {
            prop_assume!((q - 1.0).abs() > 1e-3);
            let f = QGaussianParams::new(qq, a, 1.0, 1).unwrap().grid(800, 1e-10).unwrap();
            let mq = m_q(&f, q).unwrap();
            let s = tsallis_entropy(&f, q).unwrap();
            if (q > 1.0 && mq <= 1.0) || (q < 1.0 && mq >= 1.0) {
                prop_assert!(s >= 0.0);
            }
        }
    }
}
