use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;

const SAMPLING_SEED: u64 = 0x0005_eed0_f41b;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RipEstimate {
    pub delta: f64,
    /// All supports enumerated; otherwise `delta` is a lower bound.
    pub exact: bool,
    pub supports: u64,
}

/// Largest `|⟨a_i, a_j⟩|` over distinct columns.
///
/// For a realified matrix (rows stacked as real parts then imaginary parts)
/// the inner product is the complex one, `Σ conj(a_i) a_j`.
pub fn mutual_coherence(a: &DMatrix<f64>, realified: bool) -> Result<f64, AnalysisError> {
    let n = a.ncols();
    if n < 2 {
        return Err(AnalysisError::TooFewColumns { need: 2, got: n });
    }
    // stacked real and imaginary rows: Re⟨a_i, a_j⟩ is the real Gram entry
    let gram = a.tr_mul(a);
    let gram_im = realified.then(|| {
        let m = a.nrows() / 2;
        let (re, im) = (a.rows(0, m), a.rows(m, m));
        re.tr_mul(&im) - im.tr_mul(&re)
    });
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let im = gram_im.as_ref().map_or(0.0, |g| g[(i, j)]);
            best = best.max(gram[(i, j)].hypot(im));
        }
    }
    Ok(best)
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn support_deviation(a: &DMatrix<f64>, support: &[usize]) -> f64 {
    let sub = a.select_columns(support);
    let gram = sub.tr_mul(&sub);
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|l| (l - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Visits every increasing `r`-subset of `0..n` whose first entry is `first`.
fn for_each_with_first(n: usize, r: usize, first: usize, mut f: impl FnMut(&[usize])) {
    if first + r > n {
        return;
    }
    let mut idx: Vec<usize> = (first..first + r).collect();
    loop {
        f(&idx);
        // rightmost position after the first that can still move
        let mut pos = r;
        loop {
            if pos <= 1 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - r + pos {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// `δ_r` as the largest spectral deviation of `A_SᵀA_S` from the identity.
///
/// Enumerates all `C(n, r)` supports when that fits in `budget`; otherwise
/// samples `budget` random supports and reports a lower bound, or fails
/// when `require_exact` is set.
pub fn rip_delta_bruteforce(
    a: &DMatrix<f64>,
    r: usize,
    budget: u64,
    require_exact: bool,
) -> Result<RipEstimate, AnalysisError> {
    let n = a.ncols();
    if r == 0 || r > n {
        return Err(AnalysisError::TooFewColumns { need: r.max(1), got: n });
    }
    let total = binomial(n, r);
    if total <= budget as u128 {
        let delta = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut worst: f64 = 0.0;
                for_each_with_first(n, r, first, |s| {
                    worst = worst.max(support_deviation(a, s));
                });
                worst
            })
            .reduce(|| 0.0, f64::max);
        return Ok(RipEstimate {
            delta,
            exact: true,
            supports: total as u64,
        });
    }
    if require_exact {
        return Err(AnalysisError::BudgetExceeded {
            supports: total,
            budget,
        });
    }
    let delta = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            rng.set_stream(i);
            let mut s = rand::seq::index::sample(&mut rng, n, r).into_vec();
            s.sort_unstable();
            support_deviation(a, &s)
        })
        .reduce(|| 0.0, f64::max);
    Ok(RipEstimate {
        delta,
        exact: false,
        supports: budget,
    })
}
