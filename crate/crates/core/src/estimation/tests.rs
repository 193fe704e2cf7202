use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use statrs::function::gamma::gamma;

use super::*;
use crate::info::i_fisher;
use crate::qgaussian::QGaussianParams;

fn gauss(sigma: f64) -> ParametricModel {
    ModelSpec::GaussianLocation { sigma, dim: 1 }.build().unwrap()
}

fn abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt()
}

#[test]
fn gaussian_score_is_classical() {
    let m = gauss(1.0);
    for &(x, th) in &[(0.3, 0.0), (-1.7, 0.5), (2.2, -1.0)] {
        let psi = score_g(&m, &[th], &[x]).unwrap();
        assert!((psi[0] - (x - th)).abs() < 1e-8);
    }
}

#[test]
fn constant_in_theta_gives_zero_score_and_fisher() {
    let d: DensityFn = Arc::new(|x: &[f64], _: &[f64]| (-0.5 * x[0] * x[0]).exp() / (2.0 * PI).sqrt());
    let axes = vec![Axis::symmetric(10.0, 161).unwrap()];
    let m = ParametricModel::new("flat", d.clone(), d, axes, 1, &[vec![0.0]]).unwrap();
    assert_eq!(score_g(&m, &[0.4], &[1.0]).unwrap(), vec![0.0]);
    let j = fisher_matrix_g(&m, &[0.0]).unwrap();
    assert_eq!(j[(0, 0)], 0.0);
    assert!(matches!(spd_inverse(&j), Err(Error::SingularMatrix { .. })));
}

#[test]
fn unnormalized_model_is_rejected() {
    let d: DensityFn = Arc::new(|x: &[f64], _: &[f64]| (-0.5 * x[0] * x[0]).exp());
    let axes = vec![Axis::symmetric(10.0, 161).unwrap()];
    assert!(ParametricModel::new("bad", d.clone(), d, axes, 1, &[vec![0.0]]).is_err());
}

#[test]
fn singular_score_where_g_vanishes_inside_f() {
    let f: DensityFn = Arc::new(|x: &[f64], t: &[f64]| (-0.5 * (x[0] - t[0]).powi(2)).exp() / (2.0 * PI).sqrt());
    let g: DensityFn = Arc::new(|x: &[f64], _: &[f64]| if x[0].abs() <= 0.5 { 1.0 } else { 0.0 });
    let axes = vec![Axis::symmetric(10.0, 161).unwrap()];
    let m = ParametricModel::new("mismatch", f, g, axes, 1, &[]).unwrap();
    assert!(matches!(score_g(&m, &[0.0], &[2.0]), Err(Error::SingularScore { .. })));
    assert!(score_g(&m, &[0.0], &[0.2]).is_ok());
}

#[test]
fn escort_pair_score_identity() {
    let (q, a, gm) = (2.0, 2.0, 1.0);
    let m = ModelSpec::EscortPair { q, alpha: a, gamma: gm }.build().unwrap();
    let p = QGaussianParams::new(q, a, gm, 1).unwrap();
    let z = p.normalization().unwrap();
    let mq = p.m_q_exact(q).unwrap();
    let edge = p.support_radius().unwrap();
    for i in 0..=40 {
        let x = -1.2 + 0.06 * i as f64;
        let psi = score_g(&m, &[0.0], &[x]).unwrap()[0];
        let g = p.pdf(&[x]).unwrap();
        let expected = if x.abs() < edge - 1e-3 {
            let base = 1.0 - (q - 1.0) * gm * x.abs().powf(a);
            let dg = -a * gm * x.abs().powf(a - 1.0) * x.signum() * base.powf(1.0 / (q - 1.0) - 1.0) / z;
            -(q / mq) * g.powf(q - 1.0) * dg / g
        } else if x.abs() > edge + 1e-3 {
            0.0
        } else {
            continue;
        };
        assert!((psi - expected).abs() < 1e-8 * (1.0 + expected.abs()), "x={x}: {psi} vs {expected}");
    }
}

#[test]
fn score_has_zero_mean() {
    for spec in [
        ModelSpec::GaussianLocation { sigma: 0.7, dim: 1 },
        ModelSpec::GaussianLocation { sigma: 1.0, dim: 2 },
        ModelSpec::QgaussianLocation { q: 1.5, alpha: 2.0, gamma: 1.0 },
        ModelSpec::QgaussianLocation { q: 0.8, alpha: 2.0, gamma: 1.0 },
        ModelSpec::EscortPair { q: 2.0, alpha: 3.0, gamma: 1.0 },
    ] {
        let m = spec.build().unwrap();
        let mean = score_mean(&m, &[0.0]).unwrap();
        assert!(mean[0].abs() < 1e-6, "{spec:?}: {mean:?}");
    }
    let m = ModelSpec::ProductNormal { dim: 2 }.build().unwrap();
    for th in [[0.0, 0.0], [0.3, -0.4]] {
        let mean = score_mean(&m, &th).unwrap();
        assert!(mean.iter().all(|v| v.abs() < 1e-6), "{mean:?}");
    }
}

#[test]
fn classical_cramer_rao_equality() {
    let sigma = 1.5;
    let m = gauss(sigma);
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let r = crm_bound_scalar(&m, &est, &[0.0], 1e-9).unwrap();
    assert!((r.lhs - sigma).abs() < 1e-6);
    assert!((r.rhs - sigma).abs() < 1e-6);
    assert!(r.passed);
    assert!((r.get("equality_c").unwrap() - 1.0 / (sigma * sigma)).abs() < 1e-6);
    assert!(r.get("equality_residual").unwrap() < 1e-6);
}

#[test]
fn fourth_moment_bound_is_strict() {
    let sigma = 1.2;
    let m = gauss(sigma);
    let est = EstimatorSpec::sample_mean(4.0).unwrap();
    let r = crm_bound_scalar(&m, &est, &[0.0], 1e-9).unwrap();
    let lhs = (3.0 * sigma.powi(4)).powf(0.25);
    let rhs = sigma * abs_moment(4.0 / 3.0).powf(-0.75);
    assert!((r.lhs - lhs).abs() < 1e-6);
    // |ψ|^(4/3) has a kink at the mode, where Simpson drops to O(h^(7/3))
    assert!((r.rhs - rhs).abs() < 1e-3 * rhs, "{} vs {rhs}", r.rhs);
    assert!(r.passed && r.gap > 0.01);
    assert!(r.get("equality_residual").unwrap() > 0.01);
}

#[test]
fn biased_estimator_doubles_bound() {
    let m = gauss(1.0);
    let plain = EstimatorSpec::sample_mean(2.0).unwrap();
    let twice = EstimatorSpec::new(Arc::new(|x: &[f64]| 2.0 * x[0]), Arc::new(|t: &[f64]| t[0]), 2.0).unwrap();
    let a = crm_bound_scalar(&m, &plain, &[0.0], 1e-9).unwrap();
    let b = crm_bound_scalar(&m, &twice, &[0.0], 1e-9).unwrap();
    assert!((b.get("eta_dot").unwrap() - 2.0).abs() < 1e-8);
    assert!((b.rhs - 2.0 * a.rhs).abs() < 1e-8);
    assert!(b.passed);
}

#[test]
fn fisher_matrix_examples() {
    let j = fisher_matrix_g(&gauss(1.0), &[0.0]).unwrap();
    assert!((j[(0, 0)] - 1.0).abs() < 1e-6);
    let m3 = ModelSpec::GaussianLocation { sigma: 1.0, dim: 3 }.build().unwrap();
    let j3 = fisher_matrix_g(&m3, &[0.0]).unwrap();
    assert!((j3[(0, 0)] - 3.0).abs() < 1e-6);
    let mv = ModelSpec::ProductNormal { dim: 3 }.build().unwrap();
    let jv = fisher_matrix_g(&mv, &[0.0; 3]).unwrap();
    assert!((jv - DMatrix::identity(3, 3)).abs().max() < 1e-6);
}

#[test]
fn multivariate_sample_mean_equality() {
    let m = ModelSpec::ProductNormal { dim: 3 }.build().unwrap();
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let r = crm_bound_quadratic(&m, &est, &[0.0; 3], 1e-9).unwrap();
    assert!((r.lhs - 1.0 / 3.0).abs() < 1e-6);
    assert!((r.rhs - 1.0 / 3.0).abs() < 1e-6);
    assert!(r.passed);
    let sweep = a_sweep(&m, &est, &[0.0; 3], 20, 7, 1e-9).unwrap();
    assert!(sweep.passed, "{sweep:?}");
    assert!((sweep.lhs - (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
    assert!((sweep.lhs - sweep.get("closed_form").unwrap()).abs() < 1e-10);
}

#[test]
fn bound_forms_coincide_for_scalar_quadratic_case() {
    let m = gauss(0.8);
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let s = crm_bound_scalar(&m, &est, &[0.0], 1e-9).unwrap();
    let q = crm_bound_quadratic(&m, &est, &[0.0], 1e-9).unwrap();
    let j = fisher_matrix_g(&m, &[0.0]).unwrap();
    let g = crm_bound_general(&m, &est, &[0.0], &spd_inverse(&j).unwrap()).unwrap();
    assert!((q.rhs.sqrt() - s.rhs).abs() < 1e-10 * s.rhs);
    assert!((g - s.rhs).abs() < 1e-10 * s.rhs);
    let id = crm_bound_general(&m, &est, &[0.0], &DMatrix::identity(1, 1)).unwrap();
    assert!((id - s.rhs).abs() < 1e-10 * s.rhs);
}

#[test]
fn general_objective_is_scale_free_in_a() {
    let m = ModelSpec::ProductNormal { dim: 2 }.build().unwrap();
    let est = EstimatorSpec::sample_mean(3.0).unwrap();
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let v1 = crm_bound_general(&m, &est, &[0.1, 0.2], &a).unwrap();
    let v2 = crm_bound_general(&m, &est, &[0.1, 0.2], &(a * 7.5)).unwrap();
    assert!((v1 - v2).abs() < 1e-12 * v1);
    let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(crm_bound_general(&m, &est, &[0.0, 0.0], &not_pd).is_err());
}

#[test]
fn monte_carlo_gaussian_moment() {
    let m = gauss(1.0);
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let mc = mc_error_moment(&m, &est, &[0.0], 100_000, 11).unwrap();
    let se = mc.std_error.unwrap();
    assert!(se > 0.0 && se < 0.01);
    assert!((mc.value - 1.0).abs() < 3.0 * se, "{mc:?}");
    let again = mc_error_moment(&m, &est, &[0.0], 100_000, 11).unwrap();
    assert_eq!(mc, again);
}

#[test]
fn single_trial_is_its_error() {
    let m = gauss(1.0);
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let mc = mc_error_moment(&m, &est, &[0.5], 1, 3).unwrap();
    let draw = gaussian_draws(&[0.5], 1.0, 3, 1)[0][0];
    assert!(mc.std_error.is_none());
    assert!((mc.value - (draw - 0.5).abs()).abs() < 1e-15);
}

#[test]
fn monte_carlo_qgaussian_matches_quadrature() {
    let m = ModelSpec::QgaussianLocation { q: 2.0, alpha: 2.0, gamma: 1.0 }.build().unwrap();
    let est = EstimatorSpec::sample_mean(2.0).unwrap();
    let quad = error_moment(&m, &est, &[0.0]).unwrap().sqrt();
    assert!((quad - 0.2f64.sqrt()).abs() < 1e-8);
    let mc = mc_error_moment(&m, &est, &[0.0], 100_000, 5).unwrap();
    assert!((mc.value - quad).abs() < 3.0 * mc.std_error.unwrap());
}

#[test]
fn qcr_equality_cases() {
    let normal = QGaussianParams::standard_normal(1).grid(3000, 1e-14).unwrap();
    let r = qcr_product(&normal, 1.0, 2.0, Norm::Euclidean, 1e-9).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-6, "{r:?}");
    let p = QGaussianParams::new(2.0, 2.0, 1.0, 1).unwrap();
    let g = p.grid(3000, 0.0).unwrap();
    let r = qcr_product(&g, 2.0, 2.0, Norm::Euclidean, 1e-9).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-4, "{r:?}");
    // the q^β variant sits a factor q^(β-1) = 2 above
    assert!((r.get("product_q_beta").unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn qcr_strict_for_mixture_and_recentres() {
    let mix = GridDensity::cartesian_1d(-8.0, 8.0, 6401, |x| {
        let n = |m: f64| (-0.5 * ((x - m) / 0.5).powi(2)).exp() / (0.5 * (2.0 * PI).sqrt());
        0.5 * (n(2.0) + n(-2.0))
    })
    .unwrap();
    let r = qcr_product(&mix, 1.0, 2.0, Norm::Euclidean, 1e-9).unwrap();
    assert!(r.passed && r.gap > 0.1, "{r:?}");
    let shifted = QGaussianParams::standard_normal(1).grid(3000, 1e-14).unwrap().translated(&[1.5]).unwrap();
    let r = qcr_product(&shifted, 1.0, 2.0, Norm::Euclidean, 1e-9).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-6);
    assert_eq!(r.notes.len(), 1);
}

#[test]
fn escort_pair_reduces_to_fisher_form() {
    for (q, a) in [(2.0, 2.0), (1.5, 2.0), (2.0, 3.0)] {
        let m = ModelSpec::EscortPair { q, alpha: a, gamma: 1.0 }.build().unwrap();
        let est = EstimatorSpec::sample_mean(a).unwrap();
        let r = crm_bound_scalar(&m, &est, &[0.0], 1e-9).unwrap();
        let b = est.beta();
        let p = QGaussianParams::new(q, a, 1.0, 1).unwrap();
        let lhs = r.get("score_moment_beta").unwrap();
        let rhs = q.powf(b) * p.i_fisher_exact(q, b).unwrap();
        assert!((lhs - rhs).abs() < 1e-8 * rhs, "q={q} a={a}: {lhs} vs {rhs}");
        // grid functional with finite-difference gradients
        let grid = q.powf(b) * i_fisher(&p.grid(4000, 0.0).unwrap(), q, b).unwrap();
        assert!((lhs - grid).abs() < 1e-5 * rhs, "q={q} a={a}: {lhs} vs {grid}");
        // equality case of the scalar bound
        assert!((r.lhs - r.rhs).abs() < 1e-6 * r.rhs, "{r:?}");
        assert!(r.get("equality_residual").unwrap() < 1e-6);
    }
}

#[test]
fn location_score_is_minus_x_gradient() {
    let m = ModelSpec::QgaussianLocation { q: 1.5, alpha: 2.0, gamma: 1.0 }.build().unwrap();
    let p = QGaussianParams::new(1.5, 2.0, 1.0, 1).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.4, 1.1] {
        let h = 1e-5;
        let dx = (p.pdf(&[x + h]).unwrap() - p.pdf(&[x - h]).unwrap()) / (2.0 * h);
        let psi = score_g(&m, &[0.0], &[x]).unwrap()[0];
        assert!((psi + dx / p.pdf(&[x]).unwrap()).abs() < 1e-8);
    }
}
