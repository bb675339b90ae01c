//! Illusory shape completion by minimizing a phase-transition energy.
//!
//! Given a binary image of inducers (for example the three notched disks of
//! Kanizsa's triangle), the solver computes a phase field that is close to 1
//! on the perceived shape and close to 0 elsewhere. The pipeline is:
//!
//! 1. [`canyon::build_canyon`] turns the inducer mask into a weight field that
//!    is cheap along inducer edges.
//! 2. [`solver::run`] starts from the null hypothesis (everything outside the
//!    inducers is shape) and repeatedly solves the linearized elliptic problem
//!    of [`elliptic`] until the update is below tolerance.
//! 3. [`shape::extract_shape`] thresholds the converged field at 1/2.

pub mod canyon;
pub mod cli;
pub mod elliptic;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod pgm;
pub mod shape;
pub mod solver;

pub use error::{Error, Result};
