//! Seeded synthetic experiments comparing envelope regularizers with the
//! separable baselines.
//!
//! Every random draw comes from `ChaCha8Rng::seed_from_u64(seed)` with the
//! stream set to the trial index, so outputs do not depend on the number of
//! worker threads.

mod experiments;
mod instance;
mod methods;
mod metrics;

use std::path::Path;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::baselines::BaselineError;
use crate::penalty::PenaltyError;
use crate::solver::SolverError;

pub use experiments::{
    experiment_local_minima, experiment_matrix, experiment_robustness, experiment_sparsity,
    CsvRow, ExperimentOutput, LocalMinConfig, LocalMinRow, MatrixConfig, MatrixRow, ProbeSettings,
    RobustnessConfig, SparsityConfig, StartMode, SummaryRow,
};
pub use instance::{
    fourier_identity, gen_instance, gen_instance_trial, normalized_gaussian, paley_hadamard,
    trial_rng, Instance, InstanceKind, InstanceSpec, Problem,
};
pub use methods::{
    best_of, line_search_parameter, sweep, MethodKind, MethodSpec, ParamMode, PenaltyKind,
    ScoreKind, Scored,
};
pub use metrics::{composite_score, metric_support_diff, rel_err};

pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed) with stream = trial index";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("cannot reach noise level {0}: the noise-free data is zero")]
    InfeasibleNoiseLevel(f64),
    #[error("no dense kernel vector met the magnitude floor after {attempts} attempts")]
    KernelConstructionFailed { attempts: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("io error: {0}")]
    Io(String),
}

/// Sizes the global worker pool from `QENV_THREADS` when set; returns the
/// number of workers in use.
pub fn configure_threads() -> usize {
    if let Some(n) = std::env::var("QENV_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool built earlier in the process wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

/// Writes `path` and the metadata sidecar `path.meta.json`.
pub fn write_outputs<R: CsvRow>(out: &ExperimentOutput<R>, path: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, out.to_csv()).map_err(io)?;
    let mut meta_path = path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    let meta = serde_json::to_string_pretty(&out.metadata).expect("metadata serializes");
    std::fs::write(&meta_path, meta).map_err(io)?;
    Ok(())
}
