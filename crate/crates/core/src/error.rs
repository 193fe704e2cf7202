use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite value {value} at node {index} (coordinates {coords:?})")]
    NonFinite {
        index: usize,
        coords: Vec<f64>,
        value: f64,
    },

    #[error("negative density value {value} at node {index}")]
    Negative { index: usize, value: f64 },

    #[error("total mass {0} cannot be normalized")]
    ZeroMass(f64),

    #[error("divergent integral: {what}; refinement trace {trace:?}")]
    Divergent { what: String, trace: Vec<f64> },

    #[error("root finding failed on bracket [{lo}, {hi}]: {reason}")]
    RootFinding { lo: f64, hi: f64, reason: String },

    #[error("explicit step unstable at t={t}: {reason}")]
    Stability { t: f64, reason: String },

    #[error("solution reached the domain boundary at t={t} (boundary value {value})")]
    BoundaryContact { t: f64, value: f64 },

    #[error("score undefined: g vanishes at x={x:?} while the theta-gradient of f is {grad:?}")]
    SingularScore { x: Vec<f64>, grad: Vec<f64> },

    #[error("Fisher matrix is singular; null direction {direction:?}")]
    SingularMatrix { direction: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
