//! Penalty sequences and the quadratic envelope of `G(card(x)) + ‖x‖²`.
//!
//! Everything in this module works in the *sorted frame*: a vector is split
//! into signs, a permutation and its magnitudes sorted non-increasingly
//! ([`SignedSortDecomposition`]). The envelope value, its conjugate and both
//! proximal maps only depend on the sorted magnitudes.

mod envelope;
mod pav;
mod prox;
mod sequence;
mod sort;

pub use envelope::{
    eval_conjugate, eval_regularizer, is_tight, subgradient_contains, EnvelopeEvaluation,
    SubgradientReport,
};
pub use prox::{prox_general, prox_unit, ProxGeneralReport};
pub use sequence::PenaltySequence;
pub use sort::{sort_decompose, SignedSortDecomposition};

use thiserror::Error;

/// Magnitudes at or below this value count as zero when classifying tight
/// points, and a magnitude must sit this far below its threshold to count as
/// strictly inside `(0, √g_i)`.
pub const TIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PenaltyError {
    #[error("penalty sequence decreases at index {index} ({prev} > {next})")]
    NonMonotone { index: usize, prev: f64, next: f64 },
    #[error("penalty entry {index} is negative or NaN ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("finite penalty entry at index {index} follows an infinite one")]
    FiniteAfterInfinite { index: usize },
    #[error("cardinality {k} out of range for a sequence of length {n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("envelope is unbounded (+inf) at this point")]
    Unbounded,
    #[error("point is not tight: sorted slot {slot} has magnitude {magnitude} inside (0, {threshold})")]
    NotTightPoint {
        slot: usize,
        magnitude: f64,
        threshold: f64,
    },
    #[error("proximal duality gap {gap:e} exceeds tolerance {tol:e}")]
    GapNotClosed { gap: f64, tol: f64, best: Vec<f64> },
    #[error("quadratic weight must satisfy {requirement}, got {rho}")]
    InvalidWeight { rho: f64, requirement: &'static str },
}
