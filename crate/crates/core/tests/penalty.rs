use proptest::prelude::*;
use qenv::penalty::{
    eval_regularizer, is_tight, prox_general, prox_unit, sort_decompose, subgradient_contains,
};
use qenv::PenaltySequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

fn random_seq(rng: &mut ChaCha8Rng, n: usize, min: f64) -> PenaltySequence {
    let mut g: Vec<f64> = (0..n).map(|_| rng.random_range(min..4.0)).collect();
    g.sort_by(f64::total_cmp);
    if rng.random_bool(0.4) {
        let cut = rng.random_range(1..=n);
        g[cut - 1..].fill(INF);
    }
    PenaltySequence::new(g).unwrap()
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Random point with `k` nonzeros, all at least `sqrt(g_k)` in magnitude.
fn tight_point(rng: &mut ChaCha8Rng, seq: &PenaltySequence, k: usize, extra: f64) -> Vec<f64> {
    let n = seq.len();
    let floor = if k == 0 { 0.0 } else { seq.threshold(k) };
    let mut x = vec![0.0; n];
    for i in rand::seq::index::sample(rng, n, k) {
        x[i] = sign(rng) * (floor + extra + rng.random_range(0.0..2.0));
    }
    x
}

/// Half-subgradient `z` at a tight point: `x` on the support, tail entries
/// below `bound` in magnitude.
fn half_subgradient(rng: &mut ChaCha8Rng, x: &[f64], bound: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| if v != 0.0 { v } else { sign(rng) * rng.random_range(0.0..1.0) * bound })
        .collect()
}

fn tail_bound(seq: &PenaltySequence, x: &[f64]) -> f64 {
    let k = x.iter().filter(|v| **v != 0.0).count();
    let smallest = x.iter().filter(|v| **v != 0.0).map(|v| v.abs()).fold(INF, f64::min);
    smallest.min(seq.threshold(k + 1))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn envelope_is_below_cardinality_cost(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let seq = random_seq(&mut rng, n, 0.0);
        let x: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-3.0..3.0) })
            .collect();
        let card = x.iter().filter(|v| **v != 0.0).count();
        let cost = seq.cumulative(card).unwrap();
        match eval_regularizer(&seq, &x) {
            Ok(e) => {
                prop_assert!(e.value <= cost + 1e-9 * (1.0 + cost.abs()));
                prop_assert!(e.maximizer.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(e.maximizer.iter().all(|&t| t >= 0.0));
                prop_assert_eq!(e.tight, is_tight(&seq, &x));
            }
            Err(_) => prop_assert!(seq.g(1).is_infinite() && card > 0),
        }
    }

    #[test]
    fn envelope_equals_cost_at_tight_points(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let seq = random_seq(&mut rng, n, 0.0);
        let k = rng.random_range(0..=seq.max_cardinality());
        let x = tight_point(&mut rng, &seq, k, 0.0);
        let e = eval_regularizer(&seq, &x).unwrap();
        prop_assert!(e.tight);
        let cost = seq.cumulative(k).unwrap();
        prop_assert!((e.value - cost).abs() <= 1e-9 * (1.0 + cost));
    }

    #[test]
    fn two_dim_grid_lower_bound(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_seq(&mut rng, 2, 0.0);
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        prop_assume!(seq.g(1).is_finite());
        let value = eval_regularizer(&seq, &x).unwrap().value;
        let mut m = [x[0].abs(), x[1].abs()];
        m.sort_by(|a, b| b.total_cmp(a));
        let pen = |t: f64, g: f64| if g.is_infinite() { 0.0 } else { (t * t - g).max(0.0) };
        let (steps, top) = (300, 1.2 * (m[0] + m[1]).max(seq.threshold(1)) + 0.1);
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            let u = top * i as f64 / steps as f64;
            for j in 0..=i {
                let v = top * j as f64 / steps as f64;
                let obj = 2.0 * (m[0] * u + m[1] * v) - pen(u, seq.g(1)) - pen(v, seq.g(2));
                best = best.max(obj);
            }
        }
        best -= m[0] * m[0] + m[1] * m[1];
        // every grid point is feasible, so the exact maximum dominates the grid
        prop_assert!(value >= best - 1e-9);
        prop_assert!(value <= best + 0.05);
    }

    #[test]
    fn prox_unit_matches_enumeration(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let seq = random_seq(&mut rng, n, 0.0);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let best = (0u32..1 << n)
            .map(|mask| {
                let card = mask.count_ones() as usize;
                let dropped: f64 = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| z[i] * z[i]).sum();
                seq.cumulative(card).unwrap() + dropped
            })
            .fold(INF, f64::min);
        let x = prox_unit(&seq, &z).unwrap();
        let d = sub(&x, &z);
        let obj = eval_regularizer(&seq, &x).unwrap().value + dot(&d, &d);
        prop_assert!((obj - best).abs() <= 1e-9 * (1.0 + best));
    }

    #[test]
    fn weighted_prox_approaches_unit_prox(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let seq = random_seq(&mut rng, n, 0.0);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mags = sort_decompose(&z).magnitudes;
        let mut costs: Vec<f64> = (0..=n)
            .map(|k| seq.cumulative(k).unwrap() + mags[k..].iter().map(|m| m * m).sum::<f64>())
            .filter(|c| c.is_finite())
            .collect();
        costs.sort_by(f64::total_cmp);
        prop_assume!(costs.len() < 2 || costs[1] - costs[0] >= 1e-2);
        let rho = 1.0 + 1e-6;
        let tol = 1e-9 * (1.0 + rho * dot(&z, &z));
        let general = prox_general(&seq, &z, rho, tol).unwrap();
        let unit = prox_unit(&seq, &z).unwrap();
        let d = sub(&general.x, &unit);
        prop_assert!(dot(&d, &d).sqrt() <= 1e-3);
    }

    #[test]
    fn decomposition_is_scale_neutral(seed in 0u64..1_000_000, c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(0..=12);
        let x: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-3.0..3.0) })
            .collect();
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let (a, b) = (sort_decompose(&x), sort_decompose(&scaled));
        prop_assert_eq!(a.permutation, b.permutation);
        prop_assert_eq!(a.signs, b.signs);
    }

    /// Separated subgradients at a tight point grow faster than `d` against
    /// the subgradient at any other tight point.
    #[test]
    fn subgradient_growth(seed in 0u64..1_000_000, d in 0.01f64..0.45) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=4);
        let seq = random_seq(&mut rng, n, 0.2);
        let k = rng.random_range(1..=seq.max_cardinality().max(1));
        prop_assume!(seq.g(k).is_finite());
        let root = seq.threshold(k);
        let x = tight_point(&mut rng, &seq, k, root / (1.0 - d) - root + 1e-6);
        let head_min = x.iter().filter(|v| **v != 0.0).map(|v| v.abs()).fold(INF, f64::min);
        let bound = tail_bound(&seq, &x)
            .min((1.0 - d) * root)
            .min((1.0 - 2.0 * d) * head_min)
            * (1.0 - 1e-9);
        let z = half_subgradient(&mut rng, &x, bound);
        let w: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
        prop_assert!(subgradient_contains(&seq, &x, &w, 1e-12).unwrap().contained);

        let k2 = rng.random_range(0..=seq.max_cardinality());
        let x2 = tight_point(&mut rng, &seq, k2, 0.0);
        prop_assume!(x2 != x);
        let z2 = half_subgradient(&mut rng, &x2, tail_bound(&seq, &x2));
        let w2: Vec<f64> = z2.iter().map(|v| 2.0 * v).collect();
        prop_assert!(subgradient_contains(&seq, &x2, &w2, 1e-12).unwrap().contained);

        let dx = sub(&x2, &x);
        let lhs = dot(&sub(&z2, &z), &dx);
        prop_assert!(lhs > d * dot(&dx, &dx), "lhs {} vs {}", lhs, d * dot(&dx, &dx));
    }
}
