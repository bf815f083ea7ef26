//! Numerical study of the Allen-Cahn equation with a time-dependent logarithmic
//! double-well potential whose wells converge to `±1`, and of its convergence
//! to mean curvature flow.

pub mod barrier;
pub mod cli;
pub mod domain;
pub mod error;
pub mod mcf;
pub mod measures;
pub mod potential;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
