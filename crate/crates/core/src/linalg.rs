//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Largest singular value of `a`; 0 for an empty matrix.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `Ax − b` as a plain vector.
pub(crate) fn residual(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a * DVector::from_column_slice(x);
    ax.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// `x − t Aᵀ(Ax − b)`.
pub(crate) fn gradient_point(a: &DMatrix<f64>, x: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    let r = DVector::from_vec(residual(a, x, b));
    let g = a.tr_mul(&r);
    x.iter().zip(g.iter()).map(|(xi, gi)| xi - t * gi).collect()
}

/// Orthonormal basis of `ker(a)` as columns, from a full SVD of `a` padded
/// with zero rows to square shape.
pub(crate) fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut padded = DMatrix::zeros(m.max(n), n);
    padded.rows_mut(0, m).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Moore–Penrose pseudoinverse applied to `b`.
pub(crate) fn pinv_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = 1e-12 * smax.max(f64::MIN_POSITIVE);
    let x = svd
        .solve(&DVector::from_column_slice(b), eps)
        .expect("both factors computed");
    x.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert!((operator_norm(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-14);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!((operator_norm(&d) - 2.0).abs() < 1e-14);
        assert!((operator_norm(&DMatrix::from_element(2, 2, 1.0)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn null_space_is_orthonormal_kernel() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 3.0, 1.0]);
        let k = null_space(&a, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn pinv_gives_minimum_norm_solution() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = pinv_solve(&a, &[2.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
