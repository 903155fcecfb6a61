use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::instance::{gen_instance_trial, trial_rng, InstanceKind, InstanceSpec};
use super::methods::{best_of, sweep, MethodKind, MethodSpec, ParamMode, PenaltyKind, ScoreKind, Scored};
use super::metrics::{mean_std, rel_err};
use super::{HarnessError, PRNG_NAME};
use crate::baselines::BaselineFamily;
use crate::linalg::{dist2, norm2, null_space, pinv_solve};
use crate::penalty::PenaltySequence;
use crate::regularizer::Envelope;
use crate::solver::{
    fbs_solve, fbs_solve_matrix, objective_value, SolverConfig, VectorProblem,
};

const KERNEL_ATTEMPTS: usize = 1000;
/// Streams above this offset are reserved for start points and directions.
const AUX_STREAM: u64 = 1 << 32;

pub trait CsvRow {
    fn header() -> &'static str;
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput<R> {
    pub rows: Vec<R>,
    pub metadata: serde_json::Value,
}

impl<R: CsvRow> ExperimentOutput<R> {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", R::header());
        for r in &self.rows {
            out.push_str(&r.fields().join(","));
            out.push('\n');
        }
        out
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Aggregate over trials for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub level: f64,
    pub method: String,
    pub param: f64,
    pub rel_err_mean: f64,
    pub rel_err_std: f64,
    pub sm_mean: f64,
    pub sm_std: f64,
    pub trials: usize,
    /// Largest objective increase over all solves behind the row; only
    /// measured when the solver records traces.
    #[serde(skip)]
    pub max_ascent: f64,
}

impl CsvRow for SummaryRow {
    fn header() -> &'static str {
        "level,method,param,rel_err_mean,rel_err_std,sm_mean,sm_std,trials"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.level),
            self.method.clone(),
            num(self.param),
            num(self.rel_err_mean),
            num(self.rel_err_std),
            num(self.sm_mean),
            num(self.sm_std),
            self.trials.to_string(),
        ]
    }
}

fn summarize(level: f64, method: &str, picked: &[Scored]) -> SummaryRow {
    let errs: Vec<f64> = picked.iter().map(|s| s.rel_err).collect();
    let sms: Vec<f64> = picked.iter().map(|s| s.support_diff as f64).collect();
    let params: Vec<f64> = picked.iter().map(|s| s.param).collect();
    let (rel_err_mean, rel_err_std) = mean_std(&errs);
    let (sm_mean, sm_std) = mean_std(&sms);
    SummaryRow {
        level,
        method: method.to_string(),
        param: mean_std(&params).0,
        rel_err_mean,
        rel_err_std,
        sm_mean,
        sm_std,
        trials: picked.len(),
        max_ascent: picked.iter().map(|s| s.max_ascent).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// For each method, the chosen outcome per job: the best grid value per job,
/// or the single grid value with the lowest mean score over all jobs.
fn pick(methods: &[MethodSpec], sweeps: &[Vec<Vec<Scored>>]) -> Vec<Vec<Scored>> {
    methods
        .iter()
        .enumerate()
        .map(|(mi, method)| {
            let per_job: Vec<&Vec<Scored>> = sweeps.iter().map(|job| &job[mi]).collect();
            let fixed = matches!(method.kind, MethodKind::Baseline { mode: ParamMode::Fixed, .. });
            if fixed {
                let n_params = per_job[0].len();
                let mut best = 0;
                let mut best_mean = f64::INFINITY;
                for p in 0..n_params {
                    let mean = per_job.iter().map(|s| s[p].score).sum::<f64>() / per_job.len() as f64;
                    if mean < best_mean {
                        best_mean = mean;
                        best = p;
                    }
                }
                per_job.iter().map(|s| s[best]).collect()
            } else {
                per_job.iter().map(|s| best_of(s)).collect()
            }
        })
        .collect()
}

fn base_metadata(experiment: &str, config: &impl Serialize, started: Instant) -> serde_json::Value {
    json!({
        "experiment": experiment,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "prng": PRNG_NAME,
        "ground_truth_magnitudes": "uniform on [mag_min, 4 mag_min] with uniform signs and support",
        "noise": "uniform direction, length solving t = level * |A x0 + t u|",
        "threads": rayon::current_num_threads(),
        "wall_seconds": started.elapsed().as_secs_f64(),
        "config": config,
    })
}

fn default_levels() -> Vec<f64> {
    (0..=10).map(|i| 0.025 * i as f64).collect()
}

fn default_zero_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    pub instance: InstanceSpec,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub score: ScoreKind,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default)]
    pub output: Option<String>,
}

fn validate_methods(methods: &[MethodSpec]) -> Result<(), HarnessError> {
    if methods.is_empty() {
        return Err(HarnessError::InvalidSpec("no methods given".into()));
    }
    methods.iter().try_for_each(MethodSpec::validate)
}

/// Mean error per noise level and method; every method starts at 0.
///
/// Trial `t` uses stream `t` at every level, so the matrix and ground truth
/// are shared across levels and only the noise changes.
pub fn experiment_robustness(config: &RobustnessConfig) -> Result<ExperimentOutput<SummaryRow>, HarnessError> {
    let started = Instant::now();
    validate_methods(&config.methods)?;
    if config.instance.kind == InstanceKind::MatrixGaussianOp {
        return Err(HarnessError::InvalidSpec("robustness needs a vector instance".into()));
    }
    let mut sweeps = Vec::new();
    for &level in &config.levels {
        let spec = InstanceSpec {
            noise_level: level,
            ..config.instance.clone()
        };
        spec.validate()?;
        let level_sweeps = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let inst = gen_instance_trial(&spec, t)?;
                let problem = inst.problem.as_vector().expect("vector instance");
                let start = vec![0.0; problem.dim()];
                config
                    .methods
                    .iter()
                    .map(|m| sweep(m, problem, &inst.x_true, &start, &config.solver, config.score, config.zero_tol))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        sweeps.extend(level_sweeps);
    }
    // fixed-mode parameters are chosen over all levels at once
    let picked = pick(&config.methods, &sweeps);
    let mut rows = Vec::new();
    for (li, &level) in config.levels.iter().enumerate() {
        let jobs = li * config.trials..(li + 1) * config.trials;
        for (method, per_job) in config.methods.iter().zip(&picked) {
            rows.push(summarize(level, &method.name, &per_job[jobs.clone()]));
        }
    }
    let metadata = base_metadata("robustness", config, started);
    Ok(ExperimentOutput { rows, metadata })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// One instance, random starts with `0.2‖x₀‖ ≤ ‖x_S‖ ≤ 3‖x₀‖`.
    RandomBall,
    /// One instance per start, each started at `A†b`.
    Pseudoinverse,
}

fn default_composite() -> ScoreKind {
    ScoreKind::Composite
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityConfig {
    pub instance: InstanceSpec,
    pub starts: usize,
    pub start_mode: StartMode,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_composite")]
    pub score: ScoreKind,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default)]
    pub output: Option<String>,
}

/// Random point with uniform direction and norm uniform in `[lo, hi]`.
fn random_in_shell(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let len = rng.random_range(lo..=hi) / norm2(&dir);
    dir.into_iter().map(|v| v * len).collect()
}

/// Error and support statistics over many starts.
///
/// Baseline parameters are line-searched per instance: in random-ball mode
/// once, solving from 0, and then kept for every start; in pseudoinverse
/// mode on each instance from its own `A†b` (or once for all instances in
/// fixed mode).
pub fn experiment_sparsity(config: &SparsityConfig) -> Result<ExperimentOutput<SummaryRow>, HarnessError> {
    let started = Instant::now();
    validate_methods(&config.methods)?;
    if config.instance.kind == InstanceKind::MatrixGaussianOp {
        return Err(HarnessError::InvalidSpec("sparsity needs a vector instance".into()));
    }
    let spec = &config.instance;
    let (score, tol, solver) = (config.score, config.zero_tol, &config.solver);
    let outcomes: Vec<Vec<Scored>> = match config.start_mode {
        StartMode::RandomBall => {
            let inst = gen_instance_trial(spec, 0)?;
            let problem = inst.problem.as_vector().expect("vector instance");
            let n = problem.dim();
            let zero = vec![0.0; n];
            let tuned: Vec<MethodSpec> = config
                .methods
                .iter()
                .map(|m| {
                    let best = best_of(&sweep(m, problem, &inst.x_true, &zero, solver, score, tol)?);
                    Ok(fix_param(m, best.param))
                })
                .collect::<Result<_, HarnessError>>()?;
            let x_norm = norm2(&inst.x_true);
            (0..config.starts as u64)
                .into_par_iter()
                .map(|s| {
                    let mut rng = trial_rng(spec.seed, AUX_STREAM + s);
                    let start = random_in_shell(&mut rng, n, 0.2 * x_norm, 3.0 * x_norm);
                    tuned
                        .iter()
                        .map(|m| Ok(sweep(m, problem, &inst.x_true, &start, solver, score, tol)?[0]))
                        .collect::<Result<Vec<_>, HarnessError>>()
                })
                .collect::<Result<_, _>>()?
        }
        StartMode::Pseudoinverse => {
            let sweeps = (0..config.starts as u64)
                .into_par_iter()
                .map(|s| {
                    let inst = gen_instance_trial(spec, s)?;
                    let problem = inst.problem.as_vector().expect("vector instance");
                    let start = pinv_solve(&problem.a, &problem.b);
                    config
                        .methods
                        .iter()
                        .map(|m| sweep(m, problem, &inst.x_true, &start, solver, score, tol))
                        .collect::<Result<Vec<_>, HarnessError>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let picked = pick(&config.methods, &sweeps);
            (0..config.starts)
                .map(|s| picked.iter().map(|m| m[s]).collect())
                .collect()
        }
    };
    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let picked: Vec<Scored> = outcomes.iter().map(|o| o[mi]).collect();
            summarize(spec.noise_level, &m.name, &picked)
        })
        .collect();
    let metadata = base_metadata("sparsity", config, started);
    Ok(ExperimentOutput { rows, metadata })
}

fn fix_param(method: &MethodSpec, param: f64) -> MethodSpec {
    match &method.kind {
        MethodKind::Envelope { .. } => method.clone(),
        MethodKind::Baseline { family, a, mode, .. } => MethodSpec {
            name: method.name.clone(),
            kind: MethodKind::Baseline {
                family: *family,
                grid: vec![param],
                a: *a,
                mode: *mode,
            },
        },
    }
}

/// Local-minimum detection protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSettings {
    /// Solver iterations started at the candidate point.
    pub solver_iters: usize,
    /// The candidate is rejected if the solver moves it this far.
    pub move_tol: f64,
    pub probe_step: f64,
    pub random_directions: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            solver_iters: 100,
            move_tol: 1e-6,
            probe_step: 1e-3,
            random_directions: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMinConfig {
    pub instance: InstanceSpec,
    pub points: usize,
    /// Baselines use the first value of their grid.
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default)]
    pub output: Option<String>,
}

impl LocalMinConfig {
    /// The four penalties compared in the local-minimum table.
    pub fn standard(seed: u64, points: usize) -> Self {
        Self {
            instance: InstanceSpec {
                card_min: 9,
                card_max: 14,
                ..InstanceSpec::gaussian(100, 200, 9, 0.0, seed)
            },
            points,
            methods: vec![
                MethodSpec::envelope("R_gbar", PenaltyKind::Capped { mu: 2.0, kmax: 16 }),
                MethodSpec::envelope("R_mu", PenaltyKind::Constant { mu: 2.0 }),
                MethodSpec::baseline("lp_half", BaselineFamily::LpHalf, vec![1.0], ParamMode::Fixed),
                MethodSpec::baseline("lp_two_thirds", BaselineFamily::LpTwoThirds, vec![1.0], ParamMode::Fixed),
            ],
            solver: SolverConfig::default(),
            probe: ProbeSettings::default(),
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMinRow {
    pub method: String,
    pub param: f64,
    pub detected: usize,
    pub points: usize,
    #[serde(skip)]
    pub max_ascent: f64,
}

impl CsvRow for LocalMinRow {
    fn header() -> &'static str {
        "method,param,detected,points"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            num(self.param),
            self.detected.to_string(),
            self.points.to_string(),
        ]
    }
}

/// Dense least-squares points `A†b + x_k` with `x_k ∈ ker(A)` scaled so
/// every entry exceeds the magnitude floor.
pub(crate) fn dense_kernel_points(
    problem: &VectorProblem,
    seed: u64,
    points: usize,
    floor: f64,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let base = pinv_solve(&problem.a, &problem.b);
    let kernel = null_space(&problem.a, 1e-10);
    if kernel.ncols() == 0 {
        return Err(HarnessError::KernelConstructionFailed { attempts: 0 });
    }
    let n = problem.dim();
    (0..points as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, AUX_STREAM + i);
            for _ in 0..KERNEL_ATTEMPTS {
                let c: Vec<f64> = (0..kernel.ncols()).map(|_| rng.sample(StandardNormal)).collect();
                let v = &kernel * nalgebra::DVector::from_vec(c);
                if v.iter().any(|x| x.abs() < 1e-12) {
                    continue;
                }
                let s = 1.01
                    * (0..n)
                        .map(|j| (floor + base[j].abs()) / v[j].abs())
                        .fold(0.0, f64::max);
                let p: Vec<f64> = (0..n).map(|j| base[j] + s * v[j]).collect();
                if p.iter().all(|x| x.abs() > floor) {
                    return Ok(p);
                }
            }
            Err(HarnessError::KernelConstructionFailed {
                attempts: KERNEL_ATTEMPTS,
            })
        })
        .collect()
}

/// Counts, per method, the candidate points that pass the local-minimum
/// test: the solver started at `p` moves less than `move_tol`, and no probe
/// `p ± h e_j` or `p + h d` (seeded random unit `d`) lowers the objective.
pub fn experiment_local_minima(config: &LocalMinConfig) -> Result<ExperimentOutput<LocalMinRow>, HarnessError> {
    let started = Instant::now();
    validate_methods(&config.methods)?;
    let inst = gen_instance_trial(&config.instance, 0)?;
    let problem = inst.problem.as_vector().ok_or_else(|| {
        HarnessError::InvalidSpec("local minima needs a vector instance".into())
    })?;
    let n = problem.dim();
    let candidates = dense_kernel_points(problem, config.instance.seed, config.points, config.instance.mag_min)?;
    let mut dir_rng = trial_rng(config.instance.seed, 2 * AUX_STREAM);
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[j] = sign;
            directions.push(e);
        }
    }
    for _ in 0..config.probe.random_directions {
        directions.push(random_in_shell(&mut dir_rng, n, 1.0, 1.0));
    }
    let cfg = SolverConfig {
        max_iter: config.probe.solver_iters,
        ..config.solver.clone()
    };
    let h = config.probe.probe_step;
    let mut rows = Vec::new();
    for method in &config.methods {
        let param = method.candidates()[0];
        let reg = method.regularizer(param, n)?;
        let flags = candidates
            .par_iter()
            .map(|p| {
                let res = fbs_solve(problem, reg.as_ref(), &cfg, p)?;
                let ascent = res.max_ascent();
                if dist2(&res.x, p) >= config.probe.move_tol {
                    return Ok((false, ascent));
                }
                let f0 = objective_value(problem, reg.as_ref(), p)?;
                let slack = 1e-12 * (1.0 + f0.abs());
                for d in &directions {
                    let q: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + h * b).collect();
                    if objective_value(problem, reg.as_ref(), &q)? < f0 - slack {
                        return Ok((false, ascent));
                    }
                }
                Ok((true, ascent))
            })
            .collect::<Result<Vec<(bool, f64)>, HarnessError>>()?;
        rows.push(LocalMinRow {
            method: method.name.clone(),
            param,
            detected: flags.iter().filter(|f| f.0).count(),
            points: flags.len(),
            max_ascent: flags.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let mut metadata = base_metadata("local_minima", config, started);
    metadata["true_cardinality"] = json!(inst.x_true.iter().filter(|v| **v != 0.0).count());
    Ok(ExperimentOutput { rows, metadata })
}

fn default_measurements() -> Vec<usize> {
    vec![80, 120, 160]
}

fn default_matrix_levels() -> Vec<f64> {
    vec![0.0, 0.05]
}

fn default_kmax() -> Vec<usize> {
    (1..=6).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    #[serde(default = "ten")]
    pub rows: usize,
    #[serde(default = "ten")]
    pub cols: usize,
    #[serde(default = "two")]
    pub rank: usize,
    #[serde(default = "default_measurements")]
    pub measurements: Vec<usize>,
    #[serde(default = "default_matrix_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_kmax")]
    pub kmax: Vec<usize>,
    pub trials: usize,
    #[serde(default = "floor")]
    pub mag_min: f64,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: Option<String>,
}

fn ten() -> usize {
    10
}

fn two() -> usize {
    2
}

fn floor() -> f64 {
    2.0 * 2f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRow {
    pub p: usize,
    pub level: f64,
    pub kmax: usize,
    pub rel_err_mean: f64,
    pub rel_err_std: f64,
    /// `‖𝒜(X) − b‖ / ‖b‖`.
    pub fit_mean: f64,
    pub fit_std: f64,
    pub trials: usize,
    #[serde(skip)]
    pub max_ascent: f64,
}

impl CsvRow for MatrixRow {
    fn header() -> &'static str {
        "p,level,kmax,rel_err_mean,rel_err_std,fit_mean,fit_std,trials"
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            num(self.level),
            self.kmax.to_string(),
            num(self.rel_err_mean),
            num(self.rel_err_std),
            num(self.fit_mean),
            num(self.fit_std),
            self.trials.to_string(),
        ]
    }
}

/// Low-rank recovery with fixed-rank penalties: one row per measurement
/// count, noise level and rank cap. The row with `kmax = rank` is the
/// recovery result; the others trace data fit against rank.
pub fn experiment_matrix(config: &MatrixConfig) -> Result<ExperimentOutput<MatrixRow>, HarnessError> {
    let started = Instant::now();
    let q = config.rows.min(config.cols);
    if config.kmax.iter().any(|&k| k > q) {
        return Err(HarnessError::InvalidSpec(format!("kmax above min(rows, cols) = {q}")));
    }
    let mut rows = Vec::new();
    for &p in &config.measurements {
        for &level in &config.levels {
            let spec = InstanceSpec {
                kind: InstanceKind::MatrixGaussianOp,
                m: p,
                n: 0,
                rows: config.rows,
                cols: config.cols,
                card_min: config.rank,
                card_max: config.rank,
                mag_min: config.mag_min,
                noise_level: level,
                seed: config.seed,
            };
            spec.validate()?;
            let per_trial = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let inst = gen_instance_trial(&spec, t)?;
                    let problem = inst.problem.as_matrix().expect("matrix instance");
                    let b_norm = norm2(&problem.b);
                    config
                        .kmax
                        .iter()
                        .map(|&k| {
                            let reg = Envelope(PenaltySequence::fixed_cardinality(k, q)?);
                            let start = vec![0.0; config.rows * config.cols];
                            let res = fbs_solve_matrix(problem, &reg, &config.solver, &start)?;
                            let r = crate::linalg::residual(&problem.op, &res.x, &problem.b);
                            Ok((rel_err(&res.x, &inst.x_true), norm2(&r) / b_norm, res.max_ascent()))
                        })
                        .collect::<Result<Vec<_>, HarnessError>>()
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            for (ki, &k) in config.kmax.iter().enumerate() {
                let errs: Vec<f64> = per_trial.iter().map(|t| t[ki].0).collect();
                let fits: Vec<f64> = per_trial.iter().map(|t| t[ki].1).collect();
                let (rel_err_mean, rel_err_std) = mean_std(&errs);
                let (fit_mean, fit_std) = mean_std(&fits);
                rows.push(MatrixRow {
                    p,
                    level,
                    kmax: k,
                    rel_err_mean,
                    rel_err_std,
                    fit_mean,
                    fit_std,
                    trials: config.trials,
                    max_ascent: per_trial.iter().map(|t| t[ki].2).fold(f64::NEG_INFINITY, f64::max),
                });
            }
        }
    }
    let metadata = base_metadata("matrix", config, started);
    Ok(ExperimentOutput { rows, metadata })
}
