//! Numeric substrate: grids, quadrature, finite differences, root finding.

pub mod diff;
pub mod grid;
pub mod par;
pub mod quadrature;
pub mod roots;

pub use diff::{gradient, Norm, VectorField};
pub use grid::{Axis, Geometry, GridDensity, GridRecord};
pub use roots::{brent, solve_positive};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances shared by the verification routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative quadrature error target (also the tail-mass budget when
    /// truncating heavy-tailed densities).
    pub quadrature_rel: f64,
    /// Relative tolerance for identities.
    pub identity_rel: f64,
    /// Additive slack for inequalities near equality.
    pub inequality_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature_rel: 1e-8,
            identity_rel: 1e-2,
            inequality_slack: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults for identity checks that involve quadrature only (no PDE).
    pub fn quadrature_only() -> Self {
        Tolerances {
            identity_rel: 1e-6,
            ..Tolerances::default()
        }
    }

    pub fn validated(self) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.quadrature_rel) && ok(self.identity_rel) && ok(self.inequality_slack) {
            Ok(self)
        } else {
            Err(Error::InvalidParams(format!(
                "tolerances must be strictly positive: {self:?}"
            )))
        }
    }
}
