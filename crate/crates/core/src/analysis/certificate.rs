use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{gradient_point, norm2, operator_norm, residual};
use crate::penalty::{sort_decompose, PenaltyError, PenaltySequence, TIGHT_TOL};
use crate::solver::{stationarity_residual, VectorProblem};
use crate::util::{ext, ext_map};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
}

/// One inequality `measured (<|<=|>|>=) bound`, with `slack ≥ 0` on the
/// satisfied side. Strict inequalities are not satisfied at zero slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub required: String,
    #[serde(serialize_with = "ext")]
    pub measured: f64,
    #[serde(serialize_with = "ext")]
    pub bound: f64,
    #[serde(serialize_with = "ext")]
    pub slack: f64,
    pub strict: bool,
    pub satisfied: bool,
}

impl Condition {
    fn new(name: &str, required: String, measured: f64, bound: f64, slack: f64, strict: bool) -> Self {
        let satisfied = if strict { slack > 0.0 } else { slack >= 0.0 };
        Self {
            name: name.to_string(),
            required,
            measured,
            bound,
            slack,
            strict,
            satisfied,
        }
    }

    fn below(name: &str, required: String, measured: f64, bound: f64, strict: bool) -> Self {
        Self::new(name, required, measured, bound, bound - measured, strict)
    }

    fn above(name: &str, required: String, measured: f64, bound: f64, strict: bool) -> Self {
        Self::new(name, required, measured, bound, measured - bound, strict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub holds: bool,
    pub conditions: Vec<Condition>,
    #[serde(serialize_with = "ext_map")]
    pub parameters: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Certificate {
    fn assemble(theorem: Theorem, conditions: Vec<Condition>, parameters: BTreeMap<String, f64>, notes: Vec<String>) -> Self {
        Self {
            theorem,
            holds: conditions.iter().all(|c| c.satisfied),
            conditions,
            parameters,
            notes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let verdict = if self.holds { "holds" } else { "does not hold" };
        let _ = writeln!(out, "{:?}: {verdict}", self.theorem);
        let _ = writeln!(
            out,
            "{:<14} {:<44} {:>13} {:>13} {:>13}  ok",
            "condition", "required", "measured", "bound", "slack"
        );
        for c in &self.conditions {
            let _ = writeln!(
                out,
                "{:<14} {:<44} {:>13.6e} {:>13.6e} {:>13.6e}  {}",
                c.name,
                c.required,
                c.measured,
                c.bound,
                c.slack,
                if c.satisfied { "yes" } else { "no" }
            );
        }
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

/// `z = (I − AᵀA)x + Aᵀb`, the point whose doubled value must be a
/// subgradient at a stationary `x`.
pub fn stationarity_point(problem: &VectorProblem, x: &[f64]) -> Vec<f64> {
    gradient_point(&problem.a, x, &problem.b, 1.0)
}

fn support_magnitudes(x: &[f64]) -> Vec<f64> {
    sort_decompose(x)
        .magnitudes
        .into_iter()
        .filter(|&m| m > TIGHT_TOL)
        .collect()
}

fn check_delta(name: &'static str, value: f64, hi: f64, range: &'static str) -> Result<(), AnalysisError> {
    if value >= 0.0 && value < hi {
        Ok(())
    } else {
        Err(AnalysisError::DeltaOutOfRange { name, value, range })
    }
}

/// Sufficient conditions for `o` to be a stationary point given the
/// residual `ε = Ao − b`.
pub fn check_theorem1(
    o: &[f64],
    seq: &PenaltySequence,
    a: &DMatrix<f64>,
    b: &[f64],
) -> Result<Certificate, AnalysisError> {
    let problem = VectorProblem::new(a.clone(), b.to_vec())?;
    if o.len() != a.ncols() || seq.len() != a.ncols() {
        return Err(AnalysisError::DimensionMismatch {
            what: "point / penalty",
            expected: a.ncols(),
            got: if o.len() != a.ncols() { o.len() } else { seq.len() },
        });
    }
    let mags = support_magnitudes(o);
    let k = mags.len();
    if k == 0 {
        return Err(AnalysisError::ZeroCardinality);
    }
    let ok = mags[k - 1];
    let eps_norm = norm2(&residual(a, o, b));
    let norm_a = operator_norm(a);
    let radius = seq.threshold(k + 1).min(ok) / norm_a;
    let conditions = vec![
        Condition::above("support", "o~_k > sqrt(g_k)".into(), ok, seq.threshold(k), true),
        Condition::below("residual", "|Ao - b| <= min(sqrt(g_k+1), o~_k)/|A|".into(), eps_norm, radius, false),
    ];
    let res = stationarity_residual(&problem, seq, o)?;
    // the statement assumes o is least squares on its support
    let grad = a.tr_mul(&nalgebra::DVector::from_vec(residual(a, o, b)));
    let support_gradient = o
        .iter()
        .zip(grad.iter())
        .filter(|(v, _)| v.abs() > TIGHT_TOL)
        .map(|(_, g)| g.abs())
        .fold(0.0, f64::max);
    let mut parameters = BTreeMap::new();
    parameters.insert("support_gradient".into(), support_gradient);
    parameters.insert("k".into(), k as f64);
    parameters.insert("norm_A".into(), norm_a);
    parameters.insert("eps_norm".into(), eps_norm);
    parameters.insert("stationarity_residual".into(), res);
    let cert = Certificate::assemble(Theorem::T1, conditions, parameters, Vec::new());
    let mut notes = Vec::new();
    if cert.holds && !(res <= 1e-8) {
        notes.push(format!("conditions hold but the stationarity residual is {res:e}"));
    }
    Ok(Certificate { notes, ..cert })
}

/// Conditions under which the tight stationary point `x` is the only
/// stationary point with cardinality at most `r − k`.
pub fn check_theorem2(
    x: &[f64],
    z: &[f64],
    seq: &PenaltySequence,
    delta_r: f64,
    r: usize,
) -> Result<Certificate, AnalysisError> {
    check_delta("delta_r", delta_r, 1.0, "[0, 1)")?;
    if x.len() != seq.len() || z.len() != seq.len() {
        return Err(AnalysisError::DimensionMismatch {
            what: "point / z",
            expected: seq.len(),
            got: if x.len() != seq.len() { x.len() } else { z.len() },
        });
    }
    let xm = sort_decompose(x).magnitudes;
    if let Some(slot) = (0..xm.len()).find(|&i| xm[i] > TIGHT_TOL && xm[i] < seq.threshold(i + 1)) {
        return Err(PenaltyError::NotTightPoint {
            slot: slot + 1,
            magnitude: xm[slot],
            threshold: seq.threshold(slot + 1),
        }
        .into());
    }
    let k = support_magnitudes(x).len();
    let zt = sort_decompose(z).magnitudes;
    let gk = seq.threshold(k);
    let (lo, hi) = ((1.0 - delta_r) * gk, gk / (1.0 - delta_r));
    // distance of the closest z~_i to the closed interval; 0 means contact
    let gap = zt
        .iter()
        .map(|&v| if v < lo { lo - v } else if v > hi { v - hi } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    let z_k = if k == 0 { f64::INFINITY } else { zt[k - 1] };
    let z_next = zt.get(k).copied().unwrap_or(0.0);
    let conditions = vec![
        Condition::new(
            "interval",
            "z~_i outside [(1-d)sqrt(g_k), sqrt(g_k)/(1-d)]".into(),
            gap,
            0.0,
            gap,
            true,
        ),
        Condition::below("gap_ratio", "z~_k+1 < (1 - 2d) z~_k".into(), z_next, (1.0 - 2.0 * delta_r) * z_k, true),
    ];
    let mut parameters = BTreeMap::new();
    parameters.insert("k".into(), k as f64);
    parameters.insert("r".into(), r as f64);
    parameters.insert("delta_r".into(), delta_r);
    let radius = r.saturating_sub(k);
    parameters.insert("claim_radius".into(), radius as f64);
    let notes = vec![format!(
        "if the conditions hold, no other stationary point has cardinality <= {radius}"
    )];
    Ok(Certificate::assemble(Theorem::T2, conditions, parameters, notes))
}

/// Conditions guaranteeing a stationary point near the `k`-sparse `y`
/// observed with noise of norm `eps_norm`.
pub fn check_theorem3(
    y: &[f64],
    eps_norm: f64,
    seq: &PenaltySequence,
    delta_k: f64,
    delta_2k: f64,
) -> Result<Certificate, AnalysisError> {
    check_delta("delta_2k", delta_2k, 0.5, "[0, 1/2)")?;
    check_delta("delta_k", delta_k, 1.0, "[0, 1)")?;
    if y.len() != seq.len() {
        return Err(AnalysisError::DimensionMismatch {
            what: "y",
            expected: seq.len(),
            got: y.len(),
        });
    }
    let mags = support_magnitudes(y);
    let k = mags.len();
    if k == 0 {
        return Err(AnalysisError::ZeroCardinality);
    }
    let yk = mags[k - 1];
    let root = (1.0 - delta_2k).sqrt();
    let conditions = vec![
        Condition::above(
            "signal",
            "y~_k > 5|e|/((1-2d2k)sqrt(1-d2k))".into(),
            yk,
            5.0 * eps_norm / ((1.0 - 2.0 * delta_2k) * root),
            true,
        ),
        Condition::below(
            "threshold_k",
            "sqrt(g_k) < (1-dk)(y~_k - 2|e|/sqrt(1-d2k))".into(),
            seq.threshold(k),
            (1.0 - delta_k) * (yk - 2.0 * eps_norm / root),
            true,
        ),
        Condition::above(
            "threshold_k+1",
            "sqrt(g_k+1) > 3(1-dk)|e|/sqrt(1-d2k)".into(),
            seq.threshold(k + 1),
            3.0 * (1.0 - delta_k) * eps_norm / root,
            true,
        ),
    ];
    let mut parameters = BTreeMap::new();
    parameters.insert("k".into(), k as f64);
    parameters.insert("delta_k".into(), delta_k);
    parameters.insert("delta_2k".into(), delta_2k);
    parameters.insert("eps_norm".into(), eps_norm);
    Ok(Certificate::assemble(Theorem::T3, conditions, parameters, Vec::new()))
}
