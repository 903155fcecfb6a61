//! Regenerates the files in `assets/`: `cargo run -p qenv-cli --example make_assets`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use qenv::harness::{
    gen_instance, paley_hadamard, LocalMinConfig, MatrixConfig, MethodSpec, ParamMode,
    PenaltyKind, RobustnessConfig, ScoreKind, SparsityConfig, StartMode, InstanceSpec,
};
use qenv::solver::ProblemFile;
use qenv::{BaselineFamily, SolverConfig, VectorProblem};
use serde::Serialize;

fn json(dir: &Path, name: &str, value: &impl Serialize) {
    let text = serde_json::to_string_pretty(value).unwrap() + "\n";
    std::fs::write(dir.join(name), text).unwrap();
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    std::fs::create_dir_all(&dir).unwrap();

    let demo = gen_instance(&InstanceSpec::gaussian(40, 80, 4, 0.0, 2024)).unwrap();
    ProblemFile::Vector(demo.problem.as_vector().unwrap().clone())
        .write(&dir.join("demo_problem.txt"))
        .unwrap();
    json(&dir, "demo_truth.json", &demo.x_true);
    json(&dir, "solver.json", &SolverConfig::default());

    // [I | H/√20] has delta_4 = 2/√20, small enough for the uniqueness check
    let h = paley_hadamard(19).unwrap() / 20f64.sqrt();
    let mut a = DMatrix::zeros(20, 40);
    a.view_mut((0, 0), (20, 20)).fill_with_identity();
    a.view_mut((0, 20), (20, 20)).copy_from(&h);
    let mut y = vec![0.0; 40];
    y[3] = 4.0;
    y[27] = -3.5;
    let b = (&a * DVector::from_column_slice(&y)).as_slice().to_vec();
    ProblemFile::Vector(VectorProblem::new(a, b).unwrap())
        .write(&dir.join("hadamard_problem.txt"))
        .unwrap();
    json(&dir, "hadamard_point.json", &y);

    let small = InstanceSpec::gaussian(40, 80, 4, 0.0, 7);
    let gbar = MethodSpec::envelope("R_gbar", PenaltyKind::Capped { mu: 2.0, kmax: 8 });
    json(
        &dir,
        "robustness.json",
        &RobustnessConfig {
            instance: small.clone(),
            levels: (0..=10).map(|i| i as f64 / 40.0).collect(),
            trials: 3,
            methods: vec![
                gbar.clone(),
                MethodSpec::baseline("l1", BaselineFamily::L1, vec![0.05, 0.1, 0.2, 0.4], ParamMode::PerInstance),
            ],
            solver: SolverConfig::default(),
            score: ScoreKind::RelErr,
            zero_tol: 1e-8,
            output: Some("robustness.csv".into()),
        },
    );
    json(
        &dir,
        "sparsity.json",
        &SparsityConfig {
            instance: InstanceSpec { noise_level: 0.05, ..small },
            starts: 10,
            start_mode: StartMode::RandomBall,
            methods: vec![
                gbar,
                MethodSpec::baseline("lp_half", BaselineFamily::LpHalf, vec![0.1, 0.3, 1.0], ParamMode::PerInstance),
            ],
            solver: SolverConfig::default(),
            score: ScoreKind::Composite,
            zero_tol: 1e-8,
            output: Some("sparsity.csv".into()),
        },
    );
    json(
        &dir,
        "localmin.json",
        &LocalMinConfig {
            output: Some("localmin.csv".into()),
            ..LocalMinConfig::standard(606, 100)
        },
    );
    json(
        &dir,
        "matrix.json",
        &MatrixConfig {
            rows: 10,
            cols: 10,
            rank: 2,
            measurements: vec![80, 120, 160],
            levels: vec![0.0, 0.05],
            kmax: (1..=6).collect(),
            trials: 2,
            mag_min: 2.0 * 2f64.sqrt(),
            seed: 11,
            solver: SolverConfig::default(),
            output: Some("matrix.csv".into()),
        },
    );
}
