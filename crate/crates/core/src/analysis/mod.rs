//! Instance diagnostics and stationarity certificates.

mod certificate;
mod probe;
mod rip;

use thiserror::Error;

use crate::penalty::PenaltyError;
use crate::solver::SolverError;

pub use crate::linalg::operator_norm;
pub use certificate::{
    check_theorem1, check_theorem2, check_theorem3, stationarity_point, Certificate, Condition,
    Theorem,
};
pub use probe::{multistart_uniqueness_probe, Cluster, ProbeReport};
pub use rip::{mutual_coherence, rip_delta_bruteforce, RipEstimate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{supports} supports exceed the budget of {budget}")]
    BudgetExceeded { supports: u128, budget: u64 },
    #[error("{name} = {value} is outside {range}")]
    DeltaOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("need at least {need} columns, got {got}")]
    TooFewColumns { need: usize, got: usize },
    #[error("the point has no nonzero entries")]
    ZeroCardinality,
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
