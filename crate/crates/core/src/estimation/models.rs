//! Registry of ready-made parametric models.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{gaussian_draws, DensityFn, ParametricModel, SamplerFn};
use crate::error::{Error, Result};
use crate::numerics::Axis;
use crate::qgaussian::QGaussianParams;

/// Quadrature nodes per standard deviation for Gaussian models (one
/// dimension, and per axis in higher dimensions).
const GAUSS_NODES_PER_SIGMA: [f64; 2] = [8.0, 4.0];
/// Half width of Gaussian grids, in standard deviations.
const GAUSS_HALF_WIDTH: f64 = 10.0;

/// Models selectable by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `f = g = N(θ 1, σ² I)` on R^n with scalar θ.
    GaussianLocation { sigma: f64, dim: usize },
    /// `f = g = N(θ, I)` on R^n with θ ∈ R^n.
    ProductNormal { dim: usize },
    /// `f = g = G(x - θ)` for a one-dimensional q-Gaussian `G`.
    QgaussianLocation { q: f64, alpha: f64, gamma: f64 },
    /// `g = G(x - θ)`, `f = g^q / M_q[g]` (so `g` is the escort of `f`).
    EscortPair { q: f64, alpha: f64, gamma: f64 },
}

impl ModelSpec {
    pub const NAMES: [&'static str; 4] = [
        "gaussian-location",
        "product-normal",
        "qgaussian-location",
        "escort-pair",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::GaussianLocation { .. } => Self::NAMES[0],
            ModelSpec::ProductNormal { .. } => Self::NAMES[1],
            ModelSpec::QgaussianLocation { .. } => Self::NAMES[2],
            ModelSpec::EscortPair { .. } => Self::NAMES[3],
        }
    }

    /// Number of parameters.
    pub fn dim_theta(&self) -> usize {
        match self {
            ModelSpec::ProductNormal { dim } => *dim,
            _ => 1,
        }
    }

    pub fn build(&self) -> Result<ParametricModel> {
        match *self {
            ModelSpec::GaussianLocation { sigma, dim } => gaussian(sigma, dim, false),
            ModelSpec::ProductNormal { dim } => gaussian(1.0, dim, true),
            ModelSpec::QgaussianLocation { q, alpha, gamma } => qgaussian(q, alpha, gamma, false),
            ModelSpec::EscortPair { q, alpha, gamma } => qgaussian(q, alpha, gamma, true),
        }
    }
}

fn gaussian(sigma: f64, dim: usize, vector: bool) -> Result<ParametricModel> {
    if !(sigma.is_finite() && sigma > 0.0) || dim == 0 {
        return Err(Error::InvalidParams(format!(
            "Gaussian model needs sigma > 0 and n >= 1, got sigma={sigma}, n={dim}"
        )));
    }
    let half = GAUSS_HALF_WIDTH * sigma;
    let density_per_sigma = GAUSS_NODES_PER_SIGMA[usize::from(dim > 1)];
    let points = 2 * (GAUSS_HALF_WIDTH * density_per_sigma) as usize + 1;
    let axes = vec![Axis::symmetric(half, points)?; dim];
    let norm = (2.0 * PI * sigma * sigma).powf(-0.5 * dim as f64);
    let density: DensityFn = Arc::new(move |x: &[f64], theta: &[f64]| {
        let r2: f64 = x
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let mu = if vector { theta[i] } else { theta[0] };
                (xi - mu).powi(2)
            })
            .sum();
        norm * (-0.5 * r2 / (sigma * sigma)).exp()
    });
    let k = if vector { dim } else { 1 };
    let sampler: SamplerFn = Arc::new(move |theta: &[f64], seed, count| {
        let mean: Vec<f64> = (0..dim).map(|i| if vector { theta[i] } else { theta[0] }).collect();
        gaussian_draws(&mean, sigma, seed, count)
    });
    let name = if vector { "product-normal" } else { "gaussian-location" };
    Ok(
        ParametricModel::new(name, density.clone(), density, axes, k, &[vec![0.0; k]])?
            .with_sampler(sampler),
    )
}

fn qgaussian(q: f64, alpha: f64, gamma: f64, escort: bool) -> Result<ParametricModel> {
    let params = QGaussianParams::new(q, alpha, gamma, 1)?;
    let grid = params.grid(2000, 1e-12)?;
    let axes = grid.axes().to_vec();
    let z = params.normalization()?;
    let g: DensityFn = Arc::new(move |x: &[f64], theta: &[f64]| params.profile(x[0] - theta[0]) / z);
    let f: DensityFn = if escort {
        let mq = params.m_q_exact(q)?;
        let g = g.clone();
        Arc::new(move |x: &[f64], theta: &[f64]| g(x, theta).powf(q) / mq)
    } else {
        g.clone()
    };
    let sampler: SamplerFn = Arc::new(move |theta: &[f64], seed, count| {
        params
            .sample(seed, count)
            .map(|d| d.into_iter().map(|x| vec![x[0] + theta[0]]).collect())
            .unwrap_or_default()
    });
    let name = if escort { "escort-pair" } else { "qgaussian-location" };
    Ok(ParametricModel::new(name, f, g, axes, 1, &[vec![0.0]])?.with_sampler(sampler))
}
