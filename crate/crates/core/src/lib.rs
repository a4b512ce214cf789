//! Derivative-free Gauss-Newton trust-region solver for nonlinear least squares.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod bounds;
pub mod error;
pub mod model;
pub mod numerics;
pub mod problems;
pub mod solver;
pub mod trsolve;

pub use bounds::Bounds;
pub use error::{DfolsError, Result};
pub use solver::{solve, solve_observed, ExitFlag, Results, SolverParams};
