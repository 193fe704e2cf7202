//! Densities selectable from the command line.

use std::f64::consts::PI;

use qfisher::{GridDensity, QGaussianParams, Result as CoreResult};

use crate::config::{Params, UsageError};

pub const KEYS: [&str; 9] = ["density", "gamma", "sigma", "lower", "upper", "points", "separation", "file", "n"];

/// A density family sampled at a refinement level (level 0 = as
/// configured, each level doubles the node count).
#[derive(Debug, Clone)]
pub enum Source {
    QGaussian(QGaussianParams, usize),
    Uniform { lower: f64, upper: f64, points: usize },
    Normal { sigma: f64, points: usize },
    Mixture { separation: f64, sigma: f64, points: usize },
    File(GridDensity),
}

impl Source {
    /// Read the density keys. `q` and `alpha` are the family parameters
    /// of a q-Gaussian.
    pub fn from_params(p: &mut Params, q: f64, alpha: f64) -> std::result::Result<Source, UsageError> {
        let kind: String = p.get("density", "qgaussian".to_string())?;
        match kind.as_str() {
            "qgaussian" => {
                let gamma = p.get("gamma", 1.0)?;
                let n = p.get("n", 1usize)?;
                let points = p.get("points", 4001usize)?;
                let params = QGaussianParams::new(q, alpha, gamma, n)
                    .map_err(|e| UsageError::new("gamma", e.to_string()))?;
                Ok(Source::QGaussian(params, points / 2))
            }
            "uniform" => Ok(Source::Uniform {
                lower: p.get("lower", 0.0)?,
                upper: p.get("upper", 1.0)?,
                points: p.get("points", 1001usize)?,
            }),
            "normal" => Ok(Source::Normal { sigma: p.get("sigma", 1.0)?, points: p.get("points", 4001usize)? }),
            "mixture" => Ok(Source::Mixture {
                separation: p.get("separation", 2.0)?,
                sigma: p.get("sigma", 0.5)?,
                points: p.get("points", 4001usize)?,
            }),
            "file" => {
                let path: String = p.require("file", "when density = file")?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| UsageError::new("file", format!("cannot read {path}: {e}")))?;
                let g = GridDensity::from_json(&text).map_err(|e| UsageError::new("file", e.to_string()))?;
                Ok(Source::File(g))
            }
            other => Err(UsageError::new(
                "density",
                format!("unknown density `{other}` (qgaussian, uniform, normal, mixture, file)"),
            )),
        }
    }

    pub fn grid(&self, level: usize) -> CoreResult<GridDensity> {
        let scale = 1usize << level;
        let refine = |points: usize| (points - 1) * scale + 1;
        match self {
            Source::QGaussian(p, half) => p.grid(half * scale, 1e-12),
            Source::Uniform { lower, upper, points } => {
                let w = upper - lower;
                GridDensity::cartesian_1d(*lower, *upper, refine(*points), |_| 1.0 / w)
            }
            Source::Normal { sigma, points } => {
                let s = *sigma;
                GridDensity::cartesian_1d(-12.0 * s, 12.0 * s, refine(*points), |x| {
                    (-0.5 * x * x / (s * s)).exp() / (2.0 * PI * s * s).sqrt()
                })
            }
            Source::Mixture { separation, sigma, points } => {
                let (m, s) = (*separation, *sigma);
                let half = m + 12.0 * s;
                GridDensity::cartesian_1d(-half, half, refine(*points), |x| {
                    let z = |c: f64| (-0.5 * (x - c).powi(2) / (s * s)).exp();
                    0.5 * (z(m) + z(-m)) / (2.0 * PI * s * s).sqrt()
                })
            }
            Source::File(g) => Ok(g.clone()),
        }
    }
}
