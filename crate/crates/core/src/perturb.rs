//! Smooth random perturbations of one-dimensional densities that keep a
//! scale constraint (α-moment or entropy power).
//!
//! A perturbation multiplies the density by `1 + a b(x)`, where `b` is a
//! random combination of the first four cosine and sine modes on
//! `[-L, L]`, tapered by the bump `exp(1 - 1/(1 - (x/L)²))` and scaled to
//! `max |b| = 1`. Mode `j` gets a standard normal coefficient divided by
//! `j`. Since `|a| < 1` the result stays positive where the density is and
//! keeps its support. It is then renormalized, recentred, and dilated back
//! onto the constraint.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::entropy_power;
use crate::numerics::{Geometry, GridDensity};
use crate::qgaussian::{shard_rng, QGaussianParams};

/// Amplitude levels used for perturbation batches.
pub const AMPLITUDES: [f64; 5] = [0.01, 0.04, 0.08, 0.14, 0.2];

const MODES: usize = 4;

/// Scale constraint restored after perturbing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `E[|X|^α] = value`.
    Moment { alpha: f64, value: f64 },
    /// `N_q = value`.
    EntropyPower { q: f64, value: f64 },
}

impl Constraint {
    fn current(&self, f: &GridDensity) -> Result<f64> {
        match *self {
            Constraint::Moment { alpha, .. } => f.expectation(|x| x[0].abs().powf(alpha)),
            Constraint::EntropyPower { q, .. } => entropy_power(f, q),
        }
    }

    /// Dilation factor mapping a density with constraint value `current`
    /// onto the target.
    fn dilation(&self, current: f64) -> f64 {
        match *self {
            Constraint::Moment { alpha, value } => (value / current).powf(1.0 / alpha),
            Constraint::EntropyPower { value, .. } => (value / current).sqrt(),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Constraint::Moment { value, .. } | Constraint::EntropyPower { value, .. } => value,
        }
    }

    /// Constraint value of `f` relative to the target.
    pub fn residual(&self, f: &GridDensity) -> Result<f64> {
        Ok(self.current(f)? / self.value() - 1.0)
    }
}

/// Random mode coefficients of one perturbation direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub cos: [f64; MODES],
    pub sin: [f64; MODES],
}

impl Direction {
    /// Direction `index` of the family seeded by `seed`.
    pub fn random(seed: u64, index: usize) -> Direction {
        let mut rng = shard_rng(seed, index as u64);
        let mut draw = |j: usize| rng.sample::<f64, _>(StandardNormal) / (j + 1) as f64;
        let mut cos = [0.0; MODES];
        let mut sin = [0.0; MODES];
        for j in 0..MODES {
            cos[j] = draw(j);
            sin[j] = draw(j);
        }
        Direction { cos, sin }
    }

    fn raw(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let window = (1.0 - 1.0 / (1.0 - u * u)).exp();
        let series: f64 = (0..MODES)
            .map(|j| {
                let w = (j + 1) as f64 * PI * u;
                self.cos[j] * w.cos() + self.sin[j] * w.sin()
            })
            .sum();
        window * series
    }
}

/// Half width of the perturbed window for a q-Gaussian: 90% of the
/// support radius, or where the density falls to 1e-3 of its peak.
pub fn window_half_width(g: &QGaussianParams) -> f64 {
    match g.support_radius() {
        Some(r) => 0.9 * r,
        None => {
            // w(r) = 1e-3
            let target = 1e-3f64;
            let (q, a, gm) = (g.q(), g.alpha(), g.gamma());
            let ra = if (q - 1.0).abs() < 1e-12 {
                -target.ln()
            } else {
                (1.0 - target.powf(q - 1.0)) / (q - 1.0)
            };
            (ra / gm).powf(1.0 / a)
        }
    }
}

/// `f (1 + a b)` renormalized, recentred and dilated onto `constraint`.
pub fn perturb(
    f: &GridDensity,
    half_width: f64,
    direction: &Direction,
    amplitude: f64,
    constraint: Constraint,
) -> Result<GridDensity> {
    if f.geometry() != Geometry::Cartesian || f.dim() != 1 {
        return Err(Error::InvalidParams("perturbations need a 1-D cartesian grid".into()));
    }
    if !(amplitude.abs() < 1.0) || !(half_width > 0.0) {
        return Err(Error::InvalidParams(format!(
            "amplitude {amplitude} must lie in (-1, 1) and window {half_width} be positive"
        )));
    }
    let raw: Vec<f64> = (0..f.len()).map(|i| direction.raw(f.point(i)[0] / half_width)).collect();
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidParams("perturbation window holds no grid node".into()));
    }
    let values = f
        .values()
        .iter()
        .zip(&raw)
        .map(|(v, b)| v * (1.0 + amplitude * b / peak))
        .collect();
    let p = f.with_values(values)?.normalize()?;
    let mean = p.mean()?;
    let p = p.translated(&[-mean[0]])?;
    let c = constraint.dilation(constraint.current(&p)?);
    p.dilated(c)
}

/// One member of a perturbation batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub direction: usize,
    pub amplitude: f64,
}

/// `count` members: direction `i / 5` at amplitude `AMPLITUDES[i % 5]`.
pub fn batch(count: usize) -> Vec<Member> {
    (0..count)
        .map(|i| Member {
            direction: i / AMPLITUDES.len(),
            amplitude: AMPLITUDES[i % AMPLITUDES.len()],
        })
        .collect()
}
