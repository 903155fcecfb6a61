/// `x = D_s π x̃`: signs, a slot-to-index permutation and sorted magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSortDecomposition {
    /// Sign of each original entry (`+1` for zeros), indexed by original position.
    pub signs: Vec<f64>,
    /// `permutation[slot]` is the original index placed at sorted slot `slot`.
    pub permutation: Vec<usize>,
    /// Non-increasing magnitudes.
    pub magnitudes: Vec<f64>,
}

impl SignedSortDecomposition {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        self.restore(&self.magnitudes)
    }

    /// Places sorted-frame values back into original positions with this
    /// decomposition's signs.
    pub fn restore(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.permutation.len()];
        for (slot, &idx) in self.permutation.iter().enumerate() {
            out[idx] = self.signs[idx] * sorted[slot];
        }
        out
    }

    /// Expresses `w` in this decomposition's frame: `(D_s π)ᵀ w`.
    pub fn to_frame(&self, w: &[f64]) -> Vec<f64> {
        self.permutation
            .iter()
            .map(|&idx| self.signs[idx] * w[idx])
            .collect()
    }
}

/// Sorts magnitudes non-increasingly, breaking ties by smaller original index.
pub fn sort_decompose(x: &[f64]) -> SignedSortDecomposition {
    let mut permutation: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps smaller indices first among equal magnitudes
    permutation.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
    let magnitudes = permutation.iter().map(|&i| x[i].abs()).collect();
    let signs = x
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    SignedSortDecomposition {
        signs,
        permutation,
        magnitudes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decomposition_examples() {
        let d = sort_decompose(&[-3.0, 1.0, 0.0]);
        assert_eq!(d.signs, vec![-1.0, 1.0, 1.0]);
        assert_eq!(d.magnitudes, vec![3.0, 1.0, 0.0]);
        assert_eq!(d.permutation, vec![0, 1, 2]);

        let d = sort_decompose(&[0.0, 0.0]);
        assert_eq!(d.magnitudes, vec![0.0, 0.0]);
        assert_eq!(d.permutation, vec![0, 1]);

        let d = sort_decompose(&[2.0, -2.0]);
        assert_eq!(d.magnitudes, vec![2.0, 2.0]);
        assert_eq!(d.permutation, vec![0, 1]);
        assert_eq!(d.reconstruct(), vec![2.0, -2.0]);
    }

    proptest! {
        #[test]
        fn reconstruction_is_exact(x in prop::collection::vec(-10.0f64..10.0, 0..20)) {
            let d = sort_decompose(&x);
            prop_assert_eq!(d.reconstruct(), x.clone());
            prop_assert!(d.magnitudes.windows(2).all(|w| w[0] >= w[1]));
            let mut seen = d.permutation.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..x.len()).collect::<Vec<_>>());
        }

        #[test]
        fn positive_scaling_keeps_frame(
            x in prop::collection::vec(-10.0f64..10.0, 1..20),
            c in 0.01f64..100.0,
        ) {
            let d = sort_decompose(&x);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let e = sort_decompose(&scaled);
            prop_assert_eq!(d.permutation, e.permutation);
            prop_assert_eq!(d.signs, e.signs);
        }
    }
}
