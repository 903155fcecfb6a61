//! Forward–backward splitting for envelope- and baseline-regularized least
//! squares, on vectors and on matrices through their singular values.

mod fbs;
mod problem;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::penalty::PenaltyError;

pub use fbs::{
    default_step, fbs_solve, fbs_solve_matrix, matrix_objective_value,
    matrix_stationarity_residual, objective_value, stationarity_residual,
};
pub use problem::{MatrixProblem, ProblemFile, VectorProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("step {step} exceeds 1/|A|^2 = {limit}")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("proximal step failed: {0}")]
    ProxFailure(#[from] PenaltyError),
    #[error("singular value decomposition failed")]
    SvdFailure,
    #[error("malformed problem: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Iteration settings.
///
/// Each iteration forms `z = x − step·Aᵀ(Ax − b)` and takes the proximal
/// point of the regularizer with quadratic weight `1/step`. `step = 1` is
/// the unit map whose fixed points are exactly the stationary points; it
/// needs `‖A‖ ≤ 1`. When `step` is `None` the solver picks
/// [`default_step`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub step: Option<f64>,
    pub x_tol: f64,
    /// Duality-gap tolerance of the weighted envelope prox, relative to
    /// `1 + ρ‖z‖²`.
    pub prox_tol: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            step: None,
            x_tol: 1e-12,
            prox_tol: 1e-10,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn read(path: &Path) -> Result<Self, SolverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SolverError::Format(format!("bad config: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    /// Solution; column-major `vec(X)` for matrix problems.
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<(usize, usize)>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start point followed by one entry per iteration.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
    /// Iterate displacement per iteration.
    #[serde(skip)]
    pub displacement_trace: Vec<f64>,
    #[serde(serialize_with = "crate::util::ext")]
    pub final_objective: f64,
    /// `+∞` when the regularizer has no penalty sequence or the output is
    /// not a tight point.
    #[serde(serialize_with = "crate::util::ext")]
    pub stationarity_residual: f64,
    pub step: f64,
    pub config: SolverConfig,
}

impl SolveResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// `iteration,objective,residual`; the residual column is the iterate
    /// displacement, and row 0 is the start point.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,objective,residual\n");
        for (i, obj) in self.objective_trace.iter().enumerate() {
            let disp = if i == 0 {
                String::new()
            } else {
                format!("{:e}", self.displacement_trace[i - 1])
            };
            out.push_str(&format!("{i},{obj:e},{disp}\n"));
        }
        out
    }

    /// Largest increase between consecutive objective values; `-∞` when no
    /// trace was recorded.
    pub fn max_ascent(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
