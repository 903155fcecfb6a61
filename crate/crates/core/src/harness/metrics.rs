use crate::linalg::{dist2, norm2};

/// `‖x̂ − x₀‖ / ‖x₀‖`.
pub fn rel_err(x_hat: &[f64], x0: &[f64]) -> f64 {
    dist2(x_hat, x0) / norm2(x0)
}

/// `card(supp(x̂) △ supp(x₀))` with support meaning `|entry| > zero_tol`.
pub fn metric_support_diff(x_hat: &[f64], x0: &[f64], zero_tol: f64) -> usize {
    x_hat
        .iter()
        .zip(x0)
        .filter(|(a, b)| (a.abs() > zero_tol) != (b.abs() > zero_tol))
        .count()
}

/// `0.8·S_m/card(x₀) + 0.2·rel_err`.
pub fn composite_score(x_hat: &[f64], x0: &[f64], zero_tol: f64) -> f64 {
    let card = x0.iter().filter(|v| v.abs() > zero_tol).count();
    0.8 * metric_support_diff(x_hat, x0, zero_tol) as f64 / card as f64 + 0.2 * rel_err(x_hat, x0)
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_diff_examples() {
        let x0 = [1.0, 0.0, -2.0, 0.0];
        assert_eq!(metric_support_diff(&x0, &x0, 1e-8), 0);
        assert_eq!(metric_support_diff(&[0.0; 4], &x0, 1e-8), 2);
        assert_eq!(metric_support_diff(&[1.0, 0.5, 0.0, 0.0], &x0, 1e-8), 2);
        assert_eq!(metric_support_diff(&[1.0, 1e-9, -2.0, 0.0], &x0, 1e-8), 0);
    }

    #[test]
    fn composite_hand_case() {
        let x0 = [3.0, 4.0, 0.0, 0.0];
        let x = [3.0, 0.0, 1.0, 0.0];
        // S_m = 2, card = 2, rel_err = sqrt(16 + 1)/5
        let want = 0.8 * 2.0 / 2.0 + 0.2 * 17f64.sqrt() / 5.0;
        assert_eq!(composite_score(&x, &x0, 1e-8), want);
        assert_eq!(composite_score(&x0, &x0, 1e-8), 0.0);
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }
}
