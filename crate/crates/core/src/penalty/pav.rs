//! Pool-adjacent-violators for chain-constrained maximization of concave
//! piecewise-quadratic slot objectives
//!
//! ```text
//! φ_i(t) = 2 a_i t − c_i t² − max(t² − τ_i², 0),   t ≥ 0
//! ```
//!
//! subject to `t_1 ≥ t_2 ≥ … ≥ t_n`, with thresholds `τ` non-decreasing.
//! A pooled block keeps the sums of `a` and `c`; its thresholds are the
//! contiguous slice of `τ`, already sorted.

#[derive(Debug, Clone, Copy)]
struct Block {
    start: usize,
    end: usize,
    a: f64,
    c: f64,
    value: f64,
}

/// Maximizer of `2 a t − c t² − Σ_j max(t² − τ_j², 0)` over `t ≥ 0`, for
/// `taus` sorted ascending. Returns `+∞` when the objective is unbounded
/// (positive slope, no curvature, every threshold infinite).
pub(crate) fn block_argmax(a: f64, c: f64, taus: &[f64]) -> f64 {
    let len = taus.len();
    // Right derivative on the j-th segment is a − (j + c) t; find the first
    // segment where it turns non-positive before the next threshold.
    let crosses = |j: usize| -> bool {
        let weight = j as f64 + c;
        if weight <= 0.0 {
            return false;
        }
        let next = if j < len { taus[j] } else { f64::INFINITY };
        a <= weight * next
    };
    let (mut lo, mut hi) = (0usize, len + 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if crosses(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let j = lo;
    if j > len {
        return f64::INFINITY;
    }
    let lower = if j == 0 { 0.0 } else { taus[j - 1] };
    let weight = j as f64 + c;
    if weight <= 0.0 {
        return f64::INFINITY;
    }
    lower.max(a / weight)
}

/// Non-increasing maximizer of `Σ φ_i`. Every slot must have `a_i > 0` or
/// `c_i > 0` so that block maximizers are unique.
pub(crate) fn pav_maximize(a: &[f64], c: &[f64], taus: &[f64]) -> Vec<f64> {
    debug_assert!(a.len() == c.len() && a.len() == taus.len());
    let mut stack: Vec<Block> = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let mut block = Block {
            start: i,
            end: i + 1,
            a: a[i],
            c: c[i],
            value: block_argmax(a[i], c[i], &taus[i..i + 1]),
        };
        while let Some(prev) = stack.last() {
            if block.value <= prev.value {
                break;
            }
            let prev = stack.pop().unwrap();
            block = Block {
                start: prev.start,
                end: block.end,
                a: prev.a + block.a,
                c: prev.c + block.c,
                value: 0.0,
            };
            block.value = block_argmax(block.a, block.c, &taus[block.start..block.end]);
        }
        stack.push(block);
    }
    let mut out = vec![0.0; a.len()];
    for block in stack {
        out[block.start..block.end].fill(block.value);
    }
    out
}
