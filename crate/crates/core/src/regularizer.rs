//! Common interface over the envelope regularizer and the separable baselines.

use crate::baselines::BaselineSpec;
use crate::penalty::{
    eval_regularizer, is_tight, prox_general, prox_unit, PenaltyError, PenaltySequence,
};

/// A penalty with a value and a proximal map `argmin_x value(x) + ρ‖x − z‖²`.
pub trait Regularizer: Send + Sync {
    fn label(&self) -> String;

    /// `+∞` where the penalty is infinite.
    fn value(&self, x: &[f64]) -> Result<f64, PenaltyError>;

    fn prox(&self, z: &[f64], rho: f64, tol: f64) -> Result<Vec<f64>, PenaltyError>;

    /// The penalty sequence, for envelope regularizers.
    fn penalty(&self) -> Option<&PenaltySequence> {
        None
    }

    /// Whether `x` is a point where stationarity can be certified; always true
    /// for regularizers without a tightness notion.
    fn is_tight(&self, x: &[f64]) -> bool {
        self.penalty().is_none_or(|seq| is_tight(seq, x))
    }
}

/// The quadratic envelope `R_g` of a penalty sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope(pub PenaltySequence);

impl Regularizer for Envelope {
    fn label(&self) -> String {
        "envelope".to_string()
    }

    fn value(&self, x: &[f64]) -> Result<f64, PenaltyError> {
        match eval_regularizer(&self.0, x) {
            Ok(e) => Ok(e.value),
            Err(PenaltyError::Unbounded) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// `ρ = 1` is solved exactly by truncation; `ρ > 1` goes through the
    /// certified dual routine. Weights below one are not supported because
    /// the proximal problem is then non-convex.
    fn prox(&self, z: &[f64], rho: f64, tol: f64) -> Result<Vec<f64>, PenaltyError> {
        if rho == 1.0 {
            prox_unit(&self.0, z)
        } else if rho > 1.0 {
            prox_general(&self.0, z, rho, tol).map(|r| r.x)
        } else {
            Err(PenaltyError::InvalidWeight {
                rho,
                requirement: "rho >= 1",
            })
        }
    }

    fn penalty(&self) -> Option<&PenaltySequence> {
        Some(&self.0)
    }
}

impl Regularizer for BaselineSpec {
    fn label(&self) -> String {
        self.family.name().to_string()
    }

    fn value(&self, x: &[f64]) -> Result<f64, PenaltyError> {
        Ok(BaselineSpec::value(self, x))
    }

    fn prox(&self, z: &[f64], rho: f64, tol: f64) -> Result<Vec<f64>, PenaltyError> {
        if !(rho > 0.0) {
            return Err(PenaltyError::InvalidWeight {
                rho,
                requirement: "rho > 0",
            });
        }
        Ok(BaselineSpec::prox(self, z, rho, tol))
    }
}
