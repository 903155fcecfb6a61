mod penalty_spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qenv::analysis::{
    check_theorem1, check_theorem2, check_theorem3, mutual_coherence, rip_delta_bruteforce,
    stationarity_point, AnalysisError, Certificate,
};
use qenv::harness::{
    configure_threads, experiment_local_minima, experiment_matrix, experiment_robustness,
    experiment_sparsity, rel_err, write_outputs, CsvRow, ExperimentOutput, HarnessError,
};
use qenv::penalty::TIGHT_TOL;
use qenv::solver::ProblemFile;
use qenv::{fbs_solve, fbs_solve_matrix, Envelope, SolverConfig, VectorProblem};

use penalty_spec::PenaltySpec;

/// Sparsity- and rank-regularized least squares with quadratic-envelope penalties.
#[derive(Parser)]
#[command(name = "qenv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run forward-backward splitting and write the result as JSON.
    Solve(SolveArgs),
    /// Check the sufficient conditions of a theorem at a point.
    Certify(CertifyArgs),
    /// Restricted isometry constant of the problem matrix by enumeration.
    Rip(RipArgs),
    /// Mutual coherence of the problem matrix.
    Coherence(CoherenceArgs),
    /// Run a seeded experiment and write CSV plus a metadata sidecar.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file: JSON header line, then row-major A, then b.
    #[arg(long)]
    problem: PathBuf,
    /// const:MU, capped:MU:KMAX, fixedcard:KMAX or @FILE.json
    #[arg(long)]
    penalty: PenaltySpec,
    /// Solver configuration JSON; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start point (JSON array); zero when omitted.
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Output path for the result JSON.
    #[arg(long)]
    out: PathBuf,
    /// Ground truth (JSON array); adds `rel_err` to the output.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output path for the per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Point to certify: JSON array, or a solve result with an `x` field.
    #[arg(long)]
    point: PathBuf,
    /// const:MU, capped:MU:KMAX, fixedcard:KMAX or @FILE.json
    #[arg(long)]
    penalty: PenaltySpec,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    theorem: u8,
    /// RIP constant: delta_r for theorem 2, delta_2k for theorem 3.
    #[arg(long)]
    delta: Option<f64>,
    /// delta_k for theorem 3; defaults to the delta_2k value.
    #[arg(long)]
    delta_k: Option<f64>,
    /// Order r for theorem 2; defaults to twice the cardinality of the point.
    #[arg(long)]
    order: Option<usize>,
    /// Compute missing constants exactly, enumerating at most this many supports.
    #[arg(long, value_name = "BUDGET")]
    rip_bruteforce: Option<u64>,
    /// Output path for the certificate JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Sparsity order r.
    #[arg(long)]
    order: usize,
    /// Largest number of supports to examine.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Report a sampled lower bound instead of failing when over budget.
    #[arg(long)]
    sampled: bool,
}

#[derive(Args)]
struct CoherenceArgs {
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Robustness,
    Sparsity,
    Localmin,
    Matrix,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Experiment configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Budget(_) => 3,
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Analysis(a) => a.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let array = value.get("x").unwrap_or(&value);
    serde_json::from_value(array.clone())
        .map_err(|e| Failure::Input(format!("{}: expected an array of numbers: {e}", path.display())))
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), Failure> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Failure::Input(format!("{what} has length {}, problem has {n} unknowns", v.len())))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let problem = ProblemFile::read(&args.problem).map_err(input)?;
    let config = match &args.config {
        Some(p) => SolverConfig::read(p).map_err(input)?,
        None => SolverConfig::default(),
    };
    let n = match &problem {
        ProblemFile::Vector(p) => p.dim(),
        ProblemFile::Matrix(p) => p.rows * p.cols,
    };
    let seq = args.penalty.build(n).map_err(Failure::Input)?;
    let x0 = match &args.x0 {
        Some(p) => read_vector(p)?,
        None => vec![0.0; n],
    };
    check_len("x0", &x0, n)?;
    let truth = args.truth.as_deref().map(read_vector).transpose()?;
    if let Some(t) = &truth {
        check_len("truth", t, n)?;
    }
    let reg = Envelope(seq);
    let res = match &problem {
        ProblemFile::Vector(p) => fbs_solve(p, &reg, &config, &x0),
        ProblemFile::Matrix(p) => fbs_solve_matrix(p, &reg, &config, &x0),
    }
    .map_err(input)?;

    let mut json: serde_json::Value = serde_json::from_str(&res.to_json()).expect("valid json");
    if let Some(t) = &truth {
        json["rel_err"] = serde_json::json!(rel_err(&res.x, t));
    }
    write_file(&args.out, &(serde_json::to_string_pretty(&json).expect("valid json") + "\n"))?;
    if let Some(path) = &args.trace {
        write_file(path, &res.trace_csv())?;
    }
    eprintln!(
        "{} after {} iterations, objective {:e}",
        if res.converged { "converged" } else { "not converged" },
        res.iterations,
        res.final_objective
    );
    Ok(if res.converged { 0 } else { 2 })
}

fn vector_problem(path: &Path) -> Result<VectorProblem, Failure> {
    match ProblemFile::read(path).map_err(input)? {
        ProblemFile::Vector(p) => Ok(p),
        ProblemFile::Matrix(_) => Err(Failure::Input(
            "certificates apply to vector problems; this file holds a matrix problem".into(),
        )),
    }
}

fn exact_delta(p: &VectorProblem, r: usize, budget: u64) -> Result<f64, Failure> {
    Ok(rip_delta_bruteforce(&p.a, r, budget, true)?.delta)
}

fn certify(args: CertifyArgs) -> Result<u8, Failure> {
    let p = vector_problem(&args.problem)?;
    let x = read_vector(&args.point)?;
    check_len("point", &x, p.dim())?;
    let seq = args.penalty.build(p.dim()).map_err(Failure::Input)?;
    let k = x.iter().filter(|v| v.abs() > TIGHT_TOL).count();
    let missing = |name: &str| {
        Failure::Input(format!(
            "theorem {} needs --{name} or --rip-bruteforce BUDGET",
            args.theorem
        ))
    };
    let cert: Certificate = match args.theorem {
        1 => check_theorem1(&x, &seq, &p.a, &p.b)?,
        2 => {
            let r = args.order.unwrap_or(2 * k);
            let delta = match (args.delta, args.rip_bruteforce) {
                (Some(d), _) => d,
                (None, Some(budget)) => exact_delta(&p, r, budget)?,
                (None, None) => return Err(missing("delta")),
            };
            let z = stationarity_point(&p, &x);
            check_theorem2(&x, &z, &seq, delta, r)?
        }
        _ => {
            if k == 0 {
                return Err(AnalysisError::ZeroCardinality.into());
            }
            let delta_2k = match (args.delta, args.rip_bruteforce) {
                (Some(d), _) => d,
                (None, Some(budget)) => exact_delta(&p, 2 * k, budget)?,
                (None, None) => return Err(missing("delta")),
            };
            let delta_k = match (args.delta_k, args.rip_bruteforce, args.delta) {
                (Some(d), _, _) => d,
                (None, Some(budget), None) => exact_delta(&p, k, budget)?,
                // delta_k <= delta_2k, so the larger value is a valid bound
                _ => delta_2k,
            };
            let eps_norm = p
                .a
                .row_iter()
                .zip(&p.b)
                .map(|(row, bi)| (row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() - bi).powi(2))
                .sum::<f64>()
                .sqrt();
            check_theorem3(&x, eps_norm, &seq, delta_k, delta_2k)?
        }
    };
    print!("{}", cert.table());
    if let Some(path) = &args.out {
        write_file(path, &(cert.to_json() + "\n"))?;
    }
    Ok(if cert.holds { 0 } else { 4 })
}

fn rip(args: RipArgs) -> Result<u8, Failure> {
    let a = match ProblemFile::read(&args.problem).map_err(input)? {
        ProblemFile::Vector(p) => p.a,
        ProblemFile::Matrix(p) => p.op,
    };
    let est = rip_delta_bruteforce(&a, args.order, args.budget, !args.sampled)?;
    println!("{}", serde_json::to_string_pretty(&est).expect("valid json"));
    Ok(0)
}

fn coherence(args: CoherenceArgs) -> Result<u8, Failure> {
    let (a, realified) = match ProblemFile::read(&args.problem).map_err(input)? {
        ProblemFile::Vector(p) => (p.a, p.realified),
        ProblemFile::Matrix(p) => (p.op, false),
    };
    println!("{:.17}", mutual_coherence(&a, realified)?);
    Ok(0)
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn finish<R: CsvRow>(
    name: &str,
    out: ExperimentOutput<R>,
    path: Option<PathBuf>,
    fallback: Option<String>,
    started: Instant,
) -> Result<u8, Failure> {
    let path = path
        .or(fallback.map(PathBuf::from))
        .ok_or_else(|| Failure::Input("no output path: pass --out or set \"output\" in the config".into()))?;
    write_outputs(&out, &path)?;
    eprintln!(
        "{name}: {} rows -> {} ({:.1}s)",
        out.rows.len(),
        path.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(0)
}

fn bench(args: BenchArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    match args.experiment {
        Experiment::Robustness => {
            let cfg: qenv::harness::RobustnessConfig = parse_config(&args.config)?;
            let out = experiment_robustness(&cfg)?;
            finish("robustness", out, args.out, cfg.output, started)
        }
        Experiment::Sparsity => {
            let cfg: qenv::harness::SparsityConfig = parse_config(&args.config)?;
            let out = experiment_sparsity(&cfg)?;
            finish("sparsity", out, args.out, cfg.output, started)
        }
        Experiment::Localmin => {
            let cfg: qenv::harness::LocalMinConfig = parse_config(&args.config)?;
            let out = experiment_local_minima(&cfg)?;
            finish("localmin", out, args.out, cfg.output, started)
        }
        Experiment::Matrix => {
            let cfg: qenv::harness::MatrixConfig = parse_config(&args.config)?;
            let out = experiment_matrix(&cfg)?;
            finish("matrix", out, args.out, cfg.output, started)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Certify(a) => certify(a),
        Command::Rip(a) => rip(a),
        Command::Coherence(a) => coherence(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Input(m) | Failure::Budget(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
