use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qenv::analysis::{
    check_theorem1, check_theorem2, check_theorem3, multistart_uniqueness_probe,
    mutual_coherence, operator_norm, rip_delta_bruteforce, stationarity_point, AnalysisError,
};
use qenv::solver::stationarity_residual;
use qenv::{BaselineFamily, BaselineSpec, Envelope, PenaltySequence, SolverConfig, VectorProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const INF: f64 = f64::INFINITY;

fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in a.column_iter_mut() {
        let nrm = col.norm();
        col /= nrm;
    }
    a
}

fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (a * DVector::from_column_slice(x)).iter().copied().collect()
}

/// Least-squares fit of `b` restricted to `support`.
fn oracle_fit(a: &DMatrix<f64>, b: &[f64], support: &[usize]) -> Vec<f64> {
    let sub = a.select_columns(support);
    let coef = sub.svd(true, true).solve(&DVector::from_column_slice(b), 1e-14).unwrap();
    let mut x = vec![0.0; a.ncols()];
    for (i, &j) in support.iter().enumerate() {
        x[j] = coef[i];
    }
    x
}

#[test]
fn operator_norm_examples() {
    assert!((operator_norm(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-15);
    assert!((operator_norm(&DMatrix::from_element(2, 2, 1.0)) - 2.0).abs() < 1e-14);
}

#[test]
fn theorem1_noise_free_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = gaussian(&mut rng, 30, 60);
    let mut y = vec![0.0; 60];
    y[3] = 4.0;
    y[17] = -3.5;
    y[40] = 5.0;
    let b = mat_vec(&a, &y);
    let seq = PenaltySequence::capped(2.0, 10, 60).unwrap();
    let cert = check_theorem1(&y, &seq, &a, &b).unwrap();
    assert!(cert.holds, "{}", cert.table());
    assert!(cert.parameters["stationarity_residual"] <= 1e-9);
    assert_eq!(cert.parameters["k"], 3.0);
}

#[test]
fn theorem1_large_residual_fails_bound() {
    let a = DMatrix::<f64>::identity(3, 3);
    let seq = PenaltySequence::constant(1.0, 3).unwrap();
    let o = [2.0, 0.0, 0.0];
    // bound is min(1, 2)/1 = 1; put a residual of norm 10 off the support
    let b = [2.0, 10.0, 0.0];
    let cert = check_theorem1(&o, &seq, &a, &b).unwrap();
    assert!(!cert.holds);
    assert!(cert.conditions[0].satisfied);
    assert!(!cert.conditions[1].satisfied);
    assert!((cert.conditions[1].slack + 9.0).abs() < 1e-12);
}

#[test]
fn theorem1_boundary_is_strict() {
    let a = DMatrix::<f64>::identity(2, 2);
    let seq = PenaltySequence::constant(4.0, 2).unwrap();
    let o = [2.0, 0.0];
    let cert = check_theorem1(&o, &seq, &a, &o).unwrap();
    assert_eq!(cert.conditions[0].slack, 0.0);
    assert!(!cert.conditions[0].satisfied);
    assert!(!cert.holds);
    assert!(matches!(
        check_theorem1(&[0.0, 0.0], &seq, &a, &o),
        Err(AnalysisError::ZeroCardinality)
    ));
}

#[test]
fn theorem2_examples() {
    let seq = PenaltySequence::constant(1.0, 2).unwrap();
    let cert = check_theorem2(&[3.0, 0.0], &[3.0, 0.1], &seq, 0.0, 2).unwrap();
    assert!(cert.holds, "{}", cert.table());
    assert!((cert.conditions[0].measured - 0.9).abs() < 1e-15);
    assert_eq!(cert.parameters["claim_radius"], 1.0);

    let touching = check_theorem2(&[3.0, 0.0], &[3.0, 1.0], &seq, 0.0, 2).unwrap();
    assert!(!touching.conditions[0].satisfied);

    let half = check_theorem2(&[3.0, 0.0], &[3.0, 0.1], &seq, 0.5, 2).unwrap();
    assert!(!half.conditions[1].satisfied);
    assert!(!half.holds);

    assert!(matches!(
        check_theorem2(&[0.5, 0.0], &[0.5, 0.0], &seq, 0.1, 2),
        Err(AnalysisError::Penalty(_))
    ));
    assert!(matches!(
        check_theorem2(&[3.0, 0.0], &[3.0, 0.0], &seq, 1.0, 2),
        Err(AnalysisError::DeltaOutOfRange { .. })
    ));
}

#[test]
fn theorem3_examples() {
    let seq = PenaltySequence::capped(36.0, 1, 3).unwrap();
    let y = [10.0, 0.0, 0.0];
    // hand arithmetic with sqrt(0.9) = 0.9486832980505138
    let cert = check_theorem3(&y, 1.0, &seq, 0.1, 0.1).unwrap();
    assert!(cert.holds, "{}", cert.table());
    let root = 0.9f64.sqrt();
    assert!((cert.conditions[0].bound - 6.588078458684124).abs() < 1e-12);
    assert!((cert.conditions[0].bound - 5.0 / (0.8 * root)).abs() < 1e-12);
    assert!((cert.conditions[1].bound - 7.102633403898972).abs() < 1e-12);
    assert!((cert.conditions[1].slack - 1.102633403898972).abs() < 1e-12);
    assert_eq!(cert.conditions[2].measured, INF);
    assert!((cert.conditions[2].bound - 2.846049894151541).abs() < 1e-12);

    let quiet = check_theorem3(&y, 0.0, &seq, 0.3, 0.4).unwrap();
    assert!(quiet.holds);

    let loud = check_theorem3(&y, 10.0, &seq, 0.0, 0.0).unwrap();
    assert!(!loud.conditions[0].satisfied);

    assert!(matches!(
        check_theorem3(&y, 0.0, &seq, 0.1, 0.6),
        Err(AnalysisError::DeltaOutOfRange { name: "delta_2k", .. })
    ));
}

#[test]
fn certificate_json_keeps_infinities() {
    let seq = PenaltySequence::capped(36.0, 1, 3).unwrap();
    let cert = check_theorem3(&[10.0, 0.0, 0.0], 1.0, &seq, 0.1, 0.1).unwrap();
    let v: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
    assert_eq!(v["theorem"], "T3");
    assert_eq!(v["conditions"][2]["measured"], "inf");
    assert_eq!(v["holds"], true);
    assert!(cert.table().lines().count() >= 5);
}

#[test]
fn rip_exact_dominates_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(2040);
    let a = gaussian(&mut rng, 20, 40);
    let est = rip_delta_bruteforce(&a, 2, 1_000_000, true).unwrap();
    assert!(est.exact);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let s = rand::seq::index::sample(&mut rng, 40, 2);
        let (i, j) = (s.index(0), s.index(1));
        let (u, v): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let nrm = u.hypot(v);
        let ax = a.column(i) * (u / nrm) + a.column(j) * (v / nrm);
        worst = worst.max((ax.norm_squared() - 1.0).abs());
    }
    assert!(worst <= est.delta + 1e-12, "{worst} > {}", est.delta);
    assert!(worst > 0.5 * est.delta);
    let sampled = rip_delta_bruteforce(&a, 3, 500, false).unwrap();
    let exact3 = rip_delta_bruteforce(&a, 3, 1_000_000, true).unwrap();
    assert!(!sampled.exact && sampled.delta <= exact3.delta);
}

#[test]
fn probe_finds_one_cluster_for_lasso() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = gaussian(&mut rng, 10, 20);
    let b: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
    let p = VectorProblem::new(a, b).unwrap();
    let l1 = BaselineSpec::new(BaselineFamily::L1, 1.0).unwrap();
    let rep = multistart_uniqueness_probe(&p, &l1, &SolverConfig::default(), 20, 20, 1).unwrap();
    assert_eq!(rep.converged, 20);
    assert_eq!(rep.distinct(), 1);
}

#[test]
fn probe_separates_ambiguous_instance() {
    // with A = 0.5, b = 1 both 0 and 2 are stationary for g = (1)
    let p = VectorProblem::new(DMatrix::from_element(1, 1, 0.5), vec![1.0]).unwrap();
    let seq = PenaltySequence::new(vec![1.0]).unwrap();
    assert_eq!(stationarity_residual(&p, &seq, &[0.0]).unwrap(), 0.0);
    assert!(stationarity_residual(&p, &seq, &[2.0]).unwrap() < 1e-15);
    let rep = multistart_uniqueness_probe(&p, &Envelope(seq), &SolverConfig::default(), 40, 1, 3).unwrap();
    assert!(rep.distinct() >= 2, "{rep:?}");
}

fn sign_perm(a: &DMatrix<f64>, signs: &[bool], perm: &[usize]) -> DMatrix<f64> {
    let mut out = a.select_columns(perm);
    for (j, &flip) in signs.iter().enumerate() {
        if flip {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coherence_ignores_signs_and_order(seed in 0u64..1000, signs in prop::collection::vec(any::<bool>(), 8), perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 5, 8);
        let b = sign_perm(&a, &signs, &perm);
        let (ma, mb) = (mutual_coherence(&a, false).unwrap(), mutual_coherence(&b, false).unwrap());
        prop_assert!((ma - mb).abs() < 1e-15);
    }

    #[test]
    fn theorem1_is_sound(seed in 0u64..10_000, noise in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 15, 30);
        let support = rand::seq::index::sample(&mut rng, 30, 3).into_vec();
        let mut y = vec![0.0; 30];
        for &j in &support {
            y[j] = rng.random_range(3.0..8.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        let mut b = mat_vec(&a, &y);
        for v in &mut b {
            *v += noise * rng.sample::<f64, _>(StandardNormal);
        }
        let o = oracle_fit(&a, &b, &support);
        let seq = PenaltySequence::capped(2.0, 6, 30).unwrap();
        let cert = check_theorem1(&o, &seq, &a, &b).unwrap();
        if cert.holds {
            let p = VectorProblem::new(a, b).unwrap();
            prop_assert!(stationarity_residual(&p, &seq, &o).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn certificates_are_monotone_in_noise(seed in 0u64..10_000, e1 in 0.0f64..3.0, factor in 1.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 12, 24);
        let support = rand::seq::index::sample(&mut rng, 24, 2).into_vec();
        let mut y = vec![0.0; 24];
        for &j in &support {
            y[j] = rng.random_range(2.0..6.0);
        }
        let seq = PenaltySequence::capped(2.0, 4, 24).unwrap();
        // noise orthogonal to the support columns keeps y the oracle fit
        let dir: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
        let sub = a.select_columns(&support);
        let proj = &sub * sub.clone().svd(true, true).solve(&DVector::from_vec(dir.clone()), 1e-14).unwrap();
        let perp: Vec<f64> = dir.iter().zip(proj.iter()).map(|(d, p)| d - p).collect();
        let nrm = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ay = mat_vec(&a, &y);
        let at = |scale: f64| -> Vec<f64> { ay.iter().zip(&perp).map(|(v, e)| v - scale * e / nrm).collect() };
        let small = check_theorem1(&y, &seq, &a, &at(e1)).unwrap().holds;
        let large = check_theorem1(&y, &seq, &a, &at(e1 * factor)).unwrap().holds;
        prop_assert!(small || !large);
        let t_small = check_theorem3(&y, e1, &seq, 0.1, 0.2).unwrap().holds;
        let t_large = check_theorem3(&y, e1 * factor, &seq, 0.1, 0.2).unwrap().holds;
        prop_assert!(t_small || !t_large);
    }
}

#[test]
fn stationarity_point_of_exact_fit_is_the_point() {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.5]);
    let x = [1.0, -2.0, 0.0];
    let p = VectorProblem::new(a.clone(), mat_vec(&a, &x)).unwrap();
    let z = stationarity_point(&p, &x);
    for (zi, xi) in z.iter().zip(&x) {
        assert!((zi - xi).abs() < 1e-15);
    }
}
