use nalgebra::{DMatrix, DVector};

use super::{MatrixProblem, SolveResult, SolverConfig, SolverError, VectorProblem};
use crate::linalg::{dist2, gradient_point, norm2, operator_norm, residual};
use crate::penalty::{is_tight, PenaltySequence, TIGHT_TOL};
use crate::regularizer::Regularizer;

const STEP_SLACK: f64 = 1e-12;

/// `1` when `‖A‖ ≤ 1`, otherwise `0.99/‖A‖²`.
pub fn default_step(norm_a: f64) -> f64 {
    if norm_a <= 1.0 {
        1.0
    } else {
        0.99 / (norm_a * norm_a)
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), SolverError> {
    if expected == got {
        Ok(())
    } else {
        Err(SolverError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

pub fn objective_value(
    problem: &VectorProblem,
    reg: &dyn Regularizer,
    x: &[f64],
) -> Result<f64, SolverError> {
    check_len("x", problem.dim(), x.len())?;
    let r = residual(&problem.a, x, &problem.b);
    Ok(reg.value(x)? + r.iter().map(|v| v * v).sum::<f64>())
}

pub fn matrix_objective_value(
    problem: &MatrixProblem,
    reg: &dyn Regularizer,
    x: &[f64],
) -> Result<f64, SolverError> {
    check_len("X", problem.rows * problem.cols, x.len())?;
    let sv = singular_values(x, problem.rows, problem.cols);
    let r = residual(&problem.op, x, &problem.b);
    Ok(reg.value(&sv)? + r.iter().map(|v| v * v).sum::<f64>())
}

fn resolve_step(a: &DMatrix<f64>, config: &SolverConfig) -> Result<f64, SolverError> {
    let norm = operator_norm(a);
    let step = config.step.unwrap_or_else(|| default_step(norm));
    let limit = 1.0 / (norm * norm);
    if !(step > 0.0) || step * norm * norm > 1.0 + STEP_SLACK {
        return Err(SolverError::StepTooLarge { step, limit });
    }
    Ok(step)
}

fn prox_tol(config: &SolverConfig, rho: f64, z: &[f64]) -> f64 {
    let zz: f64 = z.iter().map(|v| v * v).sum();
    config.prox_tol * (1.0 + rho * zz)
}

/// Runs the iteration from `x0` until the displacement is at most `x_tol`.
pub fn fbs_solve(
    problem: &VectorProblem,
    reg: &dyn Regularizer,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<SolveResult, SolverError> {
    check_len("x0", problem.dim(), x0.len())?;
    let step = resolve_step(&problem.a, config)?;
    let rho = 1.0 / step;
    let mut x = x0.to_vec();
    let mut objective_trace = Vec::new();
    let mut displacement_trace = Vec::new();
    if config.record_trace {
        objective_trace.push(objective_value(problem, reg, &x)?);
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let z = gradient_point(&problem.a, &x, &problem.b, step);
        let next = reg.prox(&z, rho, prox_tol(config, rho, &z))?;
        let disp = dist2(&next, &x);
        x = next;
        if config.record_trace {
            objective_trace.push(objective_value(problem, reg, &x)?);
            displacement_trace.push(disp);
        }
        if disp <= config.x_tol {
            converged = true;
            break;
        }
    }
    let final_objective = objective_value(problem, reg, &x)?;
    let stationarity_residual = match reg.penalty() {
        Some(seq) => stationarity_residual(problem, seq, &x)?,
        None => f64::INFINITY,
    };
    Ok(SolveResult {
        x,
        shape: None,
        iterations,
        converged,
        objective_trace,
        displacement_trace,
        final_objective,
        stationarity_residual,
        step,
        config: config.clone(),
    })
}

/// Matrix version: the prox acts on the singular values of the gradient
/// point and the result is recomposed with the same singular vectors.
pub fn fbs_solve_matrix(
    problem: &MatrixProblem,
    reg: &dyn Regularizer,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<SolveResult, SolverError> {
    let (r, c) = (problem.rows, problem.cols);
    check_len("X0", r * c, x0.len())?;
    if let Some(seq) = reg.penalty() {
        check_len("penalty sequence", r.min(c), seq.len())?;
    }
    let step = resolve_step(&problem.op, config)?;
    let rho = 1.0 / step;
    let mut x = x0.to_vec();
    let mut objective_trace = Vec::new();
    let mut displacement_trace = Vec::new();
    if config.record_trace {
        objective_trace.push(matrix_objective_value(problem, reg, &x)?);
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let z = gradient_point(&problem.op, &x, &problem.b, step);
        let svd = DMatrix::from_column_slice(r, c, &z)
            .try_svd(true, true, f64::EPSILON, 0)
            .ok_or(SolverError::SvdFailure)?;
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let shrunk = reg.prox(&sv, rho, prox_tol(config, rho, &sv))?;
        let u = svd.u.as_ref().ok_or(SolverError::SvdFailure)?;
        let v_t = svd.v_t.as_ref().ok_or(SolverError::SvdFailure)?;
        let next_m = u * DMatrix::from_diagonal(&DVector::from_vec(shrunk)) * v_t;
        let next: Vec<f64> = next_m.as_slice().to_vec();
        let disp = dist2(&next, &x);
        x = next;
        if config.record_trace {
            objective_trace.push(matrix_objective_value(problem, reg, &x)?);
            displacement_trace.push(disp);
        }
        if disp <= config.x_tol {
            converged = true;
            break;
        }
    }
    let final_objective = matrix_objective_value(problem, reg, &x)?;
    let stationarity_residual = match reg.penalty() {
        Some(seq) => matrix_stationarity_residual(problem, seq, &x)?,
        None => f64::INFINITY,
    };
    Ok(SolveResult {
        x,
        shape: Some((r, c)),
        iterations,
        converged,
        objective_trace,
        displacement_trace,
        final_objective,
        stationarity_residual,
        step,
        config: config.clone(),
    })
}

fn singular_values(x: &[f64], r: usize, c: usize) -> Vec<f64> {
    DMatrix::from_column_slice(r, c, x)
        .singular_values()
        .iter()
        .copied()
        .collect()
}

/// Distance of `2z`, `z = (I − AᵀA)x + Aᵀb`, to the subdifferential of
/// `R_g + ‖·‖²` at `x`.
///
/// The set is `{2x}` on the support times a box of half-width
/// `2·min(x̃_k, √g_{k+1})` off the support. The value does not depend on
/// the step used to reach `x`. Returns `+∞` at points that are not tight.
pub fn stationarity_residual(
    problem: &VectorProblem,
    seq: &PenaltySequence,
    x: &[f64],
) -> Result<f64, SolverError> {
    check_len("x", problem.dim(), x.len())?;
    check_len("penalty sequence", problem.dim(), seq.len())?;
    if !is_tight(seq, x) {
        return Ok(f64::INFINITY);
    }
    let z = gradient_point(&problem.a, x, &problem.b, 1.0);
    let support: Vec<f64> = x.iter().map(|v| v.abs()).filter(|&m| m > TIGHT_TOL).collect();
    let bound = tail_bound(seq, &support);
    let mut sq = 0.0;
    for (&xj, &zj) in x.iter().zip(&z) {
        let d = if xj.abs() > TIGHT_TOL {
            zj - xj
        } else {
            (zj.abs() - bound).max(0.0)
        };
        sq += d * d;
    }
    Ok(2.0 * sq.sqrt())
}

fn tail_bound(seq: &PenaltySequence, support: &[f64]) -> f64 {
    let smallest = support.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.min(seq.threshold(support.len() + 1))
}

/// Matrix analogue of [`stationarity_residual`]. With `X = U_k Σ V_kᵀ` and
/// `D = Z − X`, the subdifferential requires `D` to vanish outside
/// `(I − P_U) D (I − P_V)` and that block to have spectral norm at most the
/// tail bound.
pub fn matrix_stationarity_residual(
    problem: &MatrixProblem,
    seq: &PenaltySequence,
    x: &[f64],
) -> Result<f64, SolverError> {
    let (r, c) = (problem.rows, problem.cols);
    check_len("X", r * c, x.len())?;
    check_len("penalty sequence", r.min(c), seq.len())?;
    let xm = DMatrix::from_column_slice(r, c, x);
    let svd = xm
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(SolverError::SvdFailure)?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if !is_tight(seq, &sv) {
        return Ok(f64::INFINITY);
    }
    let u = svd.u.as_ref().ok_or(SolverError::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(SolverError::SvdFailure)?;
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > TIGHT_TOL).collect();
    let support: Vec<f64> = keep.iter().map(|&i| sv[i]).collect();
    let mut pu = DMatrix::<f64>::identity(r, r);
    let mut pv = DMatrix::<f64>::identity(c, c);
    for &i in &keep {
        let ui = u.column(i);
        let vi = v_t.row(i).transpose();
        pu -= ui * ui.transpose();
        pv -= &vi * vi.transpose();
    }
    let z = gradient_point(&problem.op, x, &problem.b, 1.0);
    let d = DMatrix::from_column_slice(r, c, &z) - &xm;
    let m = &pu * &d * &pv;
    let head = (&d - &m).norm();
    let bound = tail_bound(seq, &support);
    let excess: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|s| (s - bound).max(0.0))
        .collect();
    let tail = norm2(&excess);
    Ok(2.0 * (head * head + tail * tail).sqrt())
}
