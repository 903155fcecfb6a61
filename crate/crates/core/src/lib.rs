//! Quadratic-envelope regularization of cardinality and rank penalties.
//!
//! The crate evaluates the envelope `R_g` of `G(card(x)) + ‖x‖²` (minus the
//! quadratic), computes its proximal maps, runs forward–backward splitting
//! on vector and matrix least-squares problems, checks the optimality
//! conditions that certify stationary points, and drives seeded synthetic
//! experiments against separable baselines.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baselines;
pub mod harness;
pub mod linalg;
pub mod penalty;
pub mod regularizer;
pub mod solver;
mod util;

pub use baselines::{BaselineFamily, BaselineSpec};
pub use penalty::{PenaltyError, PenaltySequence};
pub use regularizer::{Envelope, Regularizer};
pub use solver::{
    fbs_solve, fbs_solve_matrix, MatrixProblem, SolveResult, SolverConfig, SolverError,
    VectorProblem,
};
