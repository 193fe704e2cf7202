//! # qfisher
//!
//! Generalized q-entropies, the (beta, q)-Fisher information and the
//! generalized q-Gaussian family, together with numerical checks of the
//! relations that tie them together:
//!
//! - entropy production along the doubly nonlinear diffusion
//!   `df/dt = div(|grad f^m|^(beta-2) grad f^m)` ([`diffusion`]),
//! - Cramér–Rao type bounds with the error moment taken under a second
//!   density `g` ([`estimation`]),
//! - the Stam-type lower bound on Fisher information times entropy power
//!   and the minimum-Fisher characterizations of q-Gaussians
//!   ([`inequalities`]).
//!
//! Densities are [`GridDensity`] values: samples on a regular tensor grid,
//! or radial profiles in any dimension. Every integral
//! is a composite Simpson sum over the grid.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod diffusion;
pub mod error;
pub mod estimation;
pub mod inequalities;
pub mod info;
pub mod numerics;
pub mod perturb;
pub mod qgaussian;
pub mod report;

pub use error::{Error, Result};
pub use numerics::{Axis, Geometry, GridDensity, Norm, Tolerances};
pub use qgaussian::{DiffusionParams, QGaussianParams};
pub use report::VerificationReport;
