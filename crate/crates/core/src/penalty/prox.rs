use serde::Serialize;

use super::pav::pav_maximize;
use super::{eval_regularizer, sort_decompose, PenaltyError, PenaltySequence};

/// Certificate attached to a [`prox_general`] solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxGeneralReport {
    pub x: Vec<f64>,
    /// Primal value `R_g(x) + ρ‖x − z‖²`.
    pub primal: f64,
    /// Dual value at the recovered multiplier.
    pub dual: f64,
    /// `primal − dual`; non-negative up to rounding.
    pub gap: f64,
}

/// Global minimizer of `R_g(x) + ‖x − z‖²`.
///
/// This is also the minimizer of `G(card(x)) + ‖x − z‖²`: keep the `k*`
/// largest magnitudes of `z` where `k*` minimizes `Σ_{i>k} z̃_i² + G(k)`,
/// ties going to the smaller `k`.
pub fn prox_unit(seq: &PenaltySequence, z: &[f64]) -> Result<Vec<f64>, PenaltyError> {
    if seq.len() != z.len() {
        return Err(PenaltyError::DimensionMismatch {
            expected: seq.len(),
            got: z.len(),
        });
    }
    let d = sort_decompose(z);
    let n = z.len();
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + d.magnitudes[i] * d.magnitudes[i];
    }
    let mut best_k = 0;
    let mut best_cost = tail[0];
    let mut prefix = 0.0;
    for (k, (&g, &rest)) in seq.values().iter().zip(&tail[1..]).enumerate() {
        prefix += g;
        if prefix.is_infinite() {
            break;
        }
        let cost = prefix + rest;
        if cost < best_cost {
            best_cost = cost;
            best_k = k + 1;
        }
    }
    let mut kept = d.magnitudes.clone();
    kept[best_k..].fill(0.0);
    Ok(d.restore(&kept))
}

/// Minimizer of `R_g(x) + ρ‖x − z‖²` for `ρ > 1`, with a duality-gap certificate.
///
/// Solved through the concave dual over non-increasing `v` in the sorted
/// frame of `z`,
///
/// ```text
/// max_v  Σ_i −max(v_i² − g_i, 0) − (ρ z̃_i − v_i)² / (ρ − 1)  +  ρ‖z‖²,
/// ```
///
/// whose slot objectives have the same shape as the envelope evaluation, so
/// the same pooling routine applies. The primal point is recovered as
/// `x̃_i = max((ρ z̃_i − v_i) / (ρ − 1), 0)`.
pub fn prox_general(
    seq: &PenaltySequence,
    z: &[f64],
    rho: f64,
    tol: f64,
) -> Result<ProxGeneralReport, PenaltyError> {
    if seq.len() != z.len() {
        return Err(PenaltyError::DimensionMismatch {
            expected: seq.len(),
            got: z.len(),
        });
    }
    if !(rho > 1.0) || !rho.is_finite() {
        return Err(PenaltyError::InvalidWeight {
            rho,
            requirement: "1 < rho < inf",
        });
    }
    let d = sort_decompose(z);
    let zt = &d.magnitudes;
    let n = zt.len();
    let scale = rho - 1.0;
    let a: Vec<f64> = zt.iter().map(|&m| rho * m / scale).collect();
    let c = vec![1.0 / scale; n];
    let taus: Vec<f64> = seq.values().iter().map(|g| g.sqrt()).collect();
    let v = pav_maximize(&a, &c, &taus);

    let xt: Vec<f64> = zt
        .iter()
        .zip(&v)
        .map(|(&m, &vi)| ((rho * m - vi) / scale).max(0.0))
        .collect();
    let x = d.restore(&xt);

    let order_violation = xt
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);

    let dual: f64 = zt
        .iter()
        .zip(&v)
        .zip(seq.values())
        .map(|((&m, &vi), &g)| {
            let r = rho * m - vi;
            rho * m * m - (vi * vi - g).max(0.0) - r * r / scale
        })
        .sum();
    let primal = match eval_regularizer(seq, &x) {
        Ok(e) => {
            e.value
                + rho
                    * x.iter()
                        .zip(z)
                        .map(|(xi, zi)| (xi - zi) * (xi - zi))
                        .sum::<f64>()
        }
        Err(PenaltyError::Unbounded) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let gap = primal - dual;
    if !(gap <= tol) || order_violation > tol {
        return Err(PenaltyError::GapNotClosed {
            gap: if order_violation > tol { f64::INFINITY } else { gap },
            tol,
            best: x,
        });
    }
    Ok(ProxGeneralReport {
        x,
        primal,
        dual,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn seq(v: &[f64]) -> PenaltySequence {
        PenaltySequence::new(v.to_vec()).unwrap()
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - ratio * (hi - lo);
            let b = lo + ratio * (hi - lo);
            if f(a) <= f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn prox_unit_examples() {
        let s = seq(&[1.0, 1.0]);
        assert_eq!(prox_unit(&s, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(prox_unit(&s, &[2.0, 0.5]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(prox_unit(&seq(&[0.0, INF]), &[3.0, 2.0]).unwrap(), vec![3.0, 0.0]);
        assert_eq!(prox_unit(&s, &[-0.5, -2.0]).unwrap(), vec![0.0, -2.0]);
    }

    #[test]
    fn prox_unit_ties_go_to_smaller_cardinality() {
        // z² = g exactly: keeping or dropping costs the same
        assert_eq!(prox_unit(&seq(&[4.0]), &[2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn prox_general_examples() {
        let r = prox_general(&seq(&[1.0]), &[0.0], 3.0, 1e-12).unwrap();
        assert_eq!(r.x, vec![0.0]);
        let r = prox_general(&seq(&[1.0]), &[0.6], 2.0, 1e-12).unwrap();
        assert!((r.x[0] - 0.2).abs() < 1e-14);
        let r = prox_general(&seq(&[1.0]), &[2.0], 2.0, 1e-12).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-14);
        let r = prox_general(&seq(&[1.0]), &[-0.6], 2.0, 1e-12).unwrap();
        assert!((r.x[0] + 0.2).abs() < 1e-14);
    }

    #[test]
    fn prox_general_matches_golden_section_in_1d() {
        for &(g, z, rho) in &[(1.0, 0.6, 2.0), (2.0, 1.1, 1.5), (0.5, 0.3, 5.0), (1.0, 0.9, 1.2)] {
            let s = seq(&[g]);
            let obj = |x: f64| eval_regularizer(&s, &[x]).unwrap().value + rho * (x - z) * (x - z);
            let oracle = golden_section(obj, -3.0, 3.0);
            let r = prox_general(&s, &[z], rho, 1e-10).unwrap();
            assert!((r.x[0] - oracle).abs() < 1e-6, "g={g} z={z} rho={rho}: {} vs {oracle}", r.x[0]);
        }
    }

    #[test]
    fn prox_general_rejects_small_weight() {
        assert!(matches!(
            prox_general(&seq(&[1.0]), &[1.0], 1.0, 1e-9),
            Err(PenaltyError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn prox_general_with_infinite_head_returns_zero() {
        let r = prox_general(&seq(&[INF, INF]), &[3.0, -1.0], 2.0, 1e-10).unwrap();
        assert_eq!(r.x, vec![0.0, 0.0]);
    }

    #[test]
    fn prox_general_approaches_prox_unit() {
        let s = seq(&[1.0, 1.0, 2.0, INF]);
        let z = [2.5, -0.3, 1.9, 0.1];
        let unit = prox_unit(&s, &z).unwrap();
        let r = prox_general(&s, &z, 1.0 + 1e-6, 1e-6).unwrap();
        let dist: f64 = unit.iter().zip(&r.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dist < 1e-3, "{:?} vs {:?}", r.x, unit);
    }
}
