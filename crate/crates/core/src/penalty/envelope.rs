use serde::Serialize;

use super::pav::pav_maximize;
use super::{sort_decompose, PenaltyError, PenaltySequence, TIGHT_TOL};

/// Result of evaluating the envelope regularizer `R_g` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeEvaluation {
    pub value: f64,
    /// A maximizing `z̃` in the sorted frame of the evaluated point.
    pub maximizer: Vec<f64>,
    /// Whether `f**(x) = f(x)`, i.e. no sorted magnitude lies in `(0, √g_i)`.
    pub tight: bool,
}

/// Outcome of [`subgradient_contains`], with the measured violations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgradientReport {
    pub contained: bool,
    /// Largest `|w_j/2 − x_j|` over the support of `x`.
    pub head_deviation: f64,
    /// Largest amount by which `|w_j|/2` exceeds `tail_bound` off the support.
    pub tail_excess: f64,
    /// `min(x̃_k, √g_{k+1})`, with `x̃_0 = ∞`.
    pub tail_bound: f64,
}

fn check_len(seq: &PenaltySequence, n: usize) -> Result<(), PenaltyError> {
    if seq.len() != n {
        return Err(PenaltyError::DimensionMismatch {
            expected: seq.len(),
            got: n,
        });
    }
    Ok(())
}

/// `f*(2y')` in the scaled form `Σ max(¼ ỹ_i² − g_i, 0)`.
pub fn eval_conjugate(seq: &PenaltySequence, y: &[f64]) -> Result<f64, PenaltyError> {
    check_len(seq, y.len())?;
    let d = sort_decompose(y);
    Ok(d.magnitudes
        .iter()
        .zip(seq.values())
        .map(|(&m, &g)| (0.25 * m * m - g).max(0.0))
        .sum())
}

/// First sorted slot whose magnitude lies strictly inside `(0, √g_i)`.
fn first_loose_slot(seq: &PenaltySequence, magnitudes: &[f64]) -> Option<(usize, f64, f64)> {
    magnitudes
        .iter()
        .zip(seq.values())
        .enumerate()
        .find(|&(_, (&m, &g))| m > TIGHT_TOL && m < g.sqrt() - TIGHT_TOL)
        .map(|(slot, (&m, &g))| (slot, m, g.sqrt()))
}

/// Whether `f**(x) = f(x)` at `x`.
pub fn is_tight(seq: &PenaltySequence, x: &[f64]) -> bool {
    let d = sort_decompose(x);
    first_loose_slot(seq, &d.magnitudes).is_none()
}

/// Evaluates `R_g(x) = max_{z̃ non-increasing} 2⟨x̃, z̃⟩ − Σ max(z̃_i² − g_i, 0) − ‖x̃‖²`.
///
/// The positive prefix of `x̃` is solved by pooling adjacent violators; slots
/// with `x̃_i = 0` contribute nothing and take `z̃_i = 0`.
pub fn eval_regularizer(
    seq: &PenaltySequence,
    x: &[f64],
) -> Result<EnvelopeEvaluation, PenaltyError> {
    check_len(seq, x.len())?;
    let d = sort_decompose(x);
    let mags = &d.magnitudes;
    let positive = mags.iter().take_while(|&&m| m > 0.0).count();
    let taus: Vec<f64> = seq.values()[..positive].iter().map(|g| g.sqrt()).collect();
    let mut maximizer = pav_maximize(&mags[..positive], &vec![0.0; positive], &taus);
    if maximizer.iter().any(|t| t.is_infinite()) {
        return Err(PenaltyError::Unbounded);
    }
    maximizer.resize(mags.len(), 0.0);

    // per slot: 2xz − max(z² − g, 0) − x², rearranged to avoid cancellation
    let value = mags
        .iter()
        .zip(&maximizer)
        .zip(seq.values())
        .map(|((&x, &z), &g)| {
            let gap = z - x;
            if z * z >= g {
                g - gap * gap
            } else {
                z * z - gap * gap
            }
        })
        .sum();

    Ok(EnvelopeEvaluation {
        value,
        maximizer,
        tight: first_loose_slot(seq, mags).is_none(),
    })
}

/// Tests `w ∈ ∂f**(x)` at a tight point `x`.
///
/// At a tight point of cardinality `k` the subgradients are `w = 2z` with
/// `z_j = x_j` on the support and the off-support magnitudes bounded by
/// `min(x̃_k, √g_{k+1})`. Signs and order of the off-support entries are free
/// since `x` vanishes there.
pub fn subgradient_contains(
    seq: &PenaltySequence,
    x: &[f64],
    w: &[f64],
    tol: f64,
) -> Result<SubgradientReport, PenaltyError> {
    check_len(seq, x.len())?;
    check_len(seq, w.len())?;
    let d = sort_decompose(x);
    if let Some((slot, magnitude, threshold)) = first_loose_slot(seq, &d.magnitudes) {
        return Err(PenaltyError::NotTightPoint {
            slot,
            magnitude,
            threshold,
        });
    }
    let k = d.magnitudes.iter().filter(|&&m| m > TIGHT_TOL).count();
    let smallest_kept = if k == 0 {
        f64::INFINITY
    } else {
        d.magnitudes[k - 1]
    };
    let tail_bound = smallest_kept.min(seq.threshold(k + 1));

    let mut head_deviation: f64 = 0.0;
    let mut tail_excess: f64 = 0.0;
    for (&xj, &wj) in x.iter().zip(w) {
        let half = 0.5 * wj;
        if xj.abs() > TIGHT_TOL {
            head_deviation = head_deviation.max((half - xj).abs());
        } else {
            tail_excess = tail_excess.max(half.abs() - tail_bound);
        }
    }
    Ok(SubgradientReport {
        contained: head_deviation <= tol && tail_excess <= tol,
        head_deviation,
        tail_excess: tail_excess.max(0.0),
        tail_bound,
    })
}
