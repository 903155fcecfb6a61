use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{dist2, norm2, pinv_solve};
use crate::penalty::TIGHT_TOL;
use crate::regularizer::Regularizer;
use crate::solver::{fbs_solve, SolverConfig, VectorProblem};

pub const CLUSTER_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub representative: Vec<f64>,
    pub count: usize,
    pub first_trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub trials: u64,
    pub converged: usize,
    /// Converged, tight, and within the cardinality bound.
    pub admissible: usize,
    pub clusters: Vec<Cluster>,
    /// Largest objective increase over all runs; `-∞` without traces.
    pub max_ascent: f64,
}

impl ProbeReport {
    pub fn distinct(&self) -> usize {
        self.clusters.len()
    }
}

/// Random start with norm uniform in `[0.2, 3]·scale`.
fn random_start(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let len = rng.random_range(0.2..=3.0) * scale / norm2(&dir);
    dir.into_iter().map(|v| v * len).collect()
}

/// Solves from `trials` seeded random starts and clusters the admissible
/// outputs in trial order.
pub fn multistart_uniqueness_probe(
    problem: &VectorProblem,
    reg: &dyn Regularizer,
    config: &SolverConfig,
    trials: u64,
    card_bound: usize,
    seed: u64,
) -> Result<ProbeReport, AnalysisError> {
    let n = problem.dim();
    let scale = norm2(&pinv_solve(&problem.a, &problem.b)).max(1.0);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let x0 = random_start(&mut rng, n, scale);
            fbs_solve(problem, reg, config, &x0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_ascent = outcomes
        .iter()
        .map(|r| r.max_ascent())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut converged = 0;
    let mut admissible = 0;
    for (t, res) in outcomes.into_iter().enumerate() {
        if !res.converged {
            continue;
        }
        converged += 1;
        let card = res.x.iter().filter(|v| v.abs() > TIGHT_TOL).count();
        if card > card_bound || !reg.is_tight(&res.x) {
            continue;
        }
        admissible += 1;
        match clusters
            .iter_mut()
            .find(|c| dist2(&c.representative, &res.x) <= CLUSTER_RADIUS)
        {
            Some(c) => c.count += 1,
            None => clusters.push(Cluster {
                representative: res.x,
                count: 1,
                first_trial: t as u64,
            }),
        }
    }
    Ok(ProbeReport {
        trials,
        converged,
        admissible,
        clusters,
        max_ascent,
    })
}
