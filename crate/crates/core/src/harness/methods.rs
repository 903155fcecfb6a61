use serde::{Deserialize, Serialize};

use super::metrics::{composite_score, metric_support_diff, rel_err};
use super::HarnessError;
use crate::baselines::{BaselineFamily, BaselineSpec, DEFAULT_SCAD_A};
use crate::penalty::PenaltySequence;
use crate::regularizer::{Envelope, Regularizer};
use crate::solver::{fbs_solve, SolveResult, SolverConfig, VectorProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyKind {
    Constant { mu: f64 },
    Capped { mu: f64, kmax: usize },
    FixedCardinality { kmax: usize },
    Explicit { values: PenaltySequence },
}

impl PenaltyKind {
    pub fn build(&self, n: usize) -> Result<PenaltySequence, HarnessError> {
        let seq = match self {
            PenaltyKind::Constant { mu } => PenaltySequence::constant(*mu, n)?,
            PenaltyKind::Capped { mu, kmax } => PenaltySequence::capped(*mu, *kmax, n)?,
            PenaltyKind::FixedCardinality { kmax } => PenaltySequence::fixed_cardinality(*kmax, n)?,
            PenaltyKind::Explicit { values } => {
                if values.len() != n {
                    return Err(HarnessError::InvalidSpec(format!(
                        "explicit penalty has length {}, problem has {n} unknowns",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        Ok(seq)
    }

    /// Number reported in the `param` column.
    pub fn param(&self) -> f64 {
        match self {
            PenaltyKind::Constant { mu } | PenaltyKind::Capped { mu, .. } => *mu,
            PenaltyKind::FixedCardinality { kmax } => *kmax as f64,
            PenaltyKind::Explicit { .. } => f64::NAN,
        }
    }
}

/// How a baseline's parameter is picked from its grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Best grid value for each instance.
    #[default]
    PerInstance,
    /// One grid value for the whole experiment, minimizing the mean score.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MethodKind {
    Envelope {
        penalty: PenaltyKind,
    },
    Baseline {
        family: BaselineFamily,
        grid: Vec<f64>,
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default)]
        mode: ParamMode,
    },
}

fn default_a() -> f64 {
    DEFAULT_SCAD_A
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: MethodKind,
}

impl MethodSpec {
    pub fn envelope(name: &str, penalty: PenaltyKind) -> Self {
        Self {
            name: name.to_string(),
            kind: MethodKind::Envelope { penalty },
        }
    }

    pub fn baseline(name: &str, family: BaselineFamily, grid: Vec<f64>, mode: ParamMode) -> Self {
        Self {
            name: name.to_string(),
            kind: MethodKind::Baseline {
                family,
                grid,
                a: DEFAULT_SCAD_A,
                mode,
            },
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if let MethodKind::Baseline { family, grid, a, .. } = &self.kind {
            if grid.is_empty() {
                return Err(HarnessError::InvalidSpec(format!("method {}: empty grid", self.name)));
            }
            for &lam in grid {
                BaselineSpec::with_a(*family, lam, *a)?;
            }
        }
        Ok(())
    }

    /// Parameter values to try, ascending; a single entry for envelopes.
    pub fn candidates(&self) -> Vec<f64> {
        match &self.kind {
            MethodKind::Envelope { penalty } => vec![penalty.param()],
            MethodKind::Baseline { grid, .. } => {
                let mut g = grid.clone();
                g.sort_by(f64::total_cmp);
                g.dedup();
                g
            }
        }
    }

    pub fn regularizer(&self, param: f64, n: usize) -> Result<Box<dyn Regularizer>, HarnessError> {
        Ok(match &self.kind {
            MethodKind::Envelope { penalty } => Box::new(Envelope(penalty.build(n)?)),
            MethodKind::Baseline { family, a, .. } => Box::new(BaselineSpec::with_a(*family, param, *a)?),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    #[default]
    RelErr,
    /// `0.8·S_m/card(x₀) + 0.2·rel_err`.
    Composite,
}

impl ScoreKind {
    pub fn eval(self, x_hat: &[f64], x0: &[f64], zero_tol: f64) -> f64 {
        match self {
            ScoreKind::RelErr => rel_err(x_hat, x0),
            ScoreKind::Composite => composite_score(x_hat, x0, zero_tol),
        }
    }
}

/// Outcome of one solve, scored against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scored {
    pub param: f64,
    pub rel_err: f64,
    pub support_diff: usize,
    pub score: f64,
    pub iterations: usize,
    /// Largest objective increase along the iterates; `-∞` without a trace.
    pub max_ascent: f64,
}

impl Scored {
    pub fn from_result(param: f64, res: &SolveResult, x0: &[f64], score: ScoreKind, zero_tol: f64) -> Self {
        Self {
            param,
            rel_err: rel_err(&res.x, x0),
            support_diff: metric_support_diff(&res.x, x0, zero_tol),
            score: score.eval(&res.x, x0, zero_tol),
            iterations: res.iterations,
            max_ascent: res.max_ascent(),
        }
    }
}

/// Solves once per candidate parameter of `method`.
pub fn sweep(
    method: &MethodSpec,
    problem: &VectorProblem,
    x_true: &[f64],
    start: &[f64],
    solver: &SolverConfig,
    score: ScoreKind,
    zero_tol: f64,
) -> Result<Vec<Scored>, HarnessError> {
    method
        .candidates()
        .into_iter()
        .map(|param| {
            let reg = method.regularizer(param, problem.dim())?;
            let res = fbs_solve(problem, reg.as_ref(), solver, start)?;
            Ok(Scored::from_result(param, &res, x_true, score, zero_tol))
        })
        .collect()
}

/// First entry with the smallest score; candidates are ascending so ties
/// go to the smaller parameter.
pub fn best_of(scored: &[Scored]) -> Scored {
    let mut best = scored[0];
    for s in &scored[1..] {
        if s.score < best.score {
            best = *s;
        }
    }
    best
}

/// Grid value of `method` minimizing `score` on one instance, solving from
/// `start`.
pub fn line_search_parameter(
    method: &MethodSpec,
    problem: &VectorProblem,
    x_true: &[f64],
    start: &[f64],
    solver: &SolverConfig,
    score: ScoreKind,
    zero_tol: f64,
) -> Result<(f64, f64), HarnessError> {
    method.validate()?;
    let best = best_of(&sweep(method, problem, x_true, start, solver, score, zero_tol)?);
    Ok((best.param, best.score))
}
