//! Separable comparison penalties: LASSO, SCAD and `ℓ^p` for `p ∈ {1/2, 2/3}`.
//!
//! Proximal maps minimize `value(x) + ρ‖x − z‖²` coordinate-wise. The weight
//! `ρ` folds into each family's threshold, e.g. the L1 map soft-thresholds at
//! `λ / (2ρ)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SCAD_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineFamily {
    L1,
    Scad,
    LpHalf,
    LpTwoThirds,
}

impl BaselineFamily {
    pub fn name(self) -> &'static str {
        match self {
            BaselineFamily::L1 => "l1",
            BaselineFamily::Scad => "scad",
            BaselineFamily::LpHalf => "lp_half",
            BaselineFamily::LpTwoThirds => "lp_two_thirds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("lambda must be non-negative and finite, got {0}")]
    InvalidLambda(f64),
    #[error("SCAD requires a > 2, got {0}")]
    InvalidScadA(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct BaselineSpec {
    pub family: BaselineFamily,
    pub lambda: f64,
    #[serde(rename = "a")]
    pub scad_a: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    family: BaselineFamily,
    lambda: f64,
    #[serde(default = "default_a")]
    a: f64,
}

fn default_a() -> f64 {
    DEFAULT_SCAD_A
}

impl TryFrom<RawSpec> for BaselineSpec {
    type Error = BaselineError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        BaselineSpec::with_a(raw.family, raw.lambda, raw.a)
    }
}

impl BaselineSpec {
    pub fn new(family: BaselineFamily, lambda: f64) -> Result<Self, BaselineError> {
        Self::with_a(family, lambda, DEFAULT_SCAD_A)
    }

    pub fn with_a(family: BaselineFamily, lambda: f64, scad_a: f64) -> Result<Self, BaselineError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(BaselineError::InvalidLambda(lambda));
        }
        if family == BaselineFamily::Scad && !(scad_a > 2.0) {
            return Err(BaselineError::InvalidScadA(scad_a));
        }
        Ok(Self {
            family,
            lambda,
            scad_a,
        })
    }

    /// Penalty of a single magnitude `t ≥ 0`.
    pub fn scalar_value(&self, t: f64) -> f64 {
        let lam = self.lambda;
        match self.family {
            BaselineFamily::L1 => lam * t,
            BaselineFamily::Scad => {
                let a = self.scad_a;
                if t <= lam {
                    lam * t
                } else if t <= a * lam {
                    (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
                } else {
                    0.5 * lam * lam * (a + 1.0)
                }
            }
            BaselineFamily::LpHalf => lam * t.sqrt(),
            BaselineFamily::LpTwoThirds => lam * t.powf(2.0 / 3.0),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| self.scalar_value(v.abs())).sum()
    }

    /// Coordinate-wise global minimizer of `value(x) + ρ‖x − z‖²`.
    pub fn prox(&self, z: &[f64], rho: f64, tol: f64) -> Vec<f64> {
        assert!(rho > 0.0, "proximal weight must be positive");
        z.iter()
            .map(|&zi| zi.signum() * self.scalar_prox(zi.abs(), rho, tol))
            .collect()
    }

    fn scalar_objective(&self, t: f64, m: f64, rho: f64) -> f64 {
        self.scalar_value(t) + rho * (t - m) * (t - m)
    }

    /// Prox of a magnitude `m ≥ 0`; the result is a magnitude as well.
    fn scalar_prox(&self, m: f64, rho: f64, tol: f64) -> f64 {
        let lam = self.lambda;
        if m == 0.0 || lam == 0.0 {
            return m;
        }
        match self.family {
            BaselineFamily::L1 => (m - lam / (2.0 * rho)).max(0.0),
            BaselineFamily::Scad => self.scad_prox(m, rho),
            BaselineFamily::LpHalf => self.lp_prox(m, rho, 0.5, tol),
            BaselineFamily::LpTwoThirds => self.lp_prox(m, rho, 2.0 / 3.0, tol),
        }
    }

    fn scad_prox(&self, m: f64, rho: f64) -> f64 {
        let lam = self.lambda;
        let a = self.scad_a;
        let mut candidates = vec![
            0.0,
            lam,
            a * lam,
            (m - lam / (2.0 * rho)).clamp(0.0, lam),
            m.max(a * lam),
        ];
        // middle piece: (aλ − t)/(a − 1) + 2ρ(t − m) = 0
        let curvature = 2.0 * rho - 1.0 / (a - 1.0);
        if curvature != 0.0 {
            let t = (2.0 * rho * m - a * lam / (a - 1.0)) / curvature;
            if t.is_finite() {
                candidates.push(t.clamp(lam, a * lam));
            }
        }
        candidates.sort_by(f64::total_cmp);
        self.argmin_of(&candidates, m, rho)
    }

    /// `ℓ^p` prox: either 0 or the larger root of `λ p t^{p−1} + 2ρ(t − m) = 0`.
    fn lp_prox(&self, m: f64, rho: f64, p: f64, tol: f64) -> f64 {
        let lam = self.lambda;
        let phi = |t: f64| lam * p * t.powf(p - 1.0) + 2.0 * rho * (t - m);
        let dphi = |t: f64| lam * p * (p - 1.0) * t.powf(p - 2.0) + 2.0 * rho;
        // φ is convex on t > 0 with its minimum at t_min
        let t_min = (lam * p * (1.0 - p) / (2.0 * rho)).powf(1.0 / (2.0 - p));
        if t_min >= m || phi(t_min) >= 0.0 {
            return 0.0;
        }
        let closed = if p == 0.5 {
            half_root(m, lam / (4.0 * rho)).map(|u| u * u)
        } else {
            None
        };
        let root = match closed {
            Some(t) if t > t_min && t <= m && phi(t).abs() <= tol.max(1e-12) * (1.0 + m) => t,
            _ => bracketed_newton(phi, dphi, t_min, m, tol),
        };
        self.argmin_of(&[0.0, root], m, rho)
    }

    fn argmin_of(&self, candidates: &[f64], m: f64, rho: f64) -> f64 {
        let mut best = candidates[0];
        let mut best_val = self.scalar_objective(best, m, rho);
        for &t in &candidates[1..] {
            let val = self.scalar_objective(t, m, rho);
            if val < best_val {
                best = t;
                best_val = val;
            }
        }
        best
    }
}

/// Largest root of `u³ − m u + q = 0` when all three roots are real.
fn half_root(m: f64, q: f64) -> Option<f64> {
    let arg = -(3.0 * q / (2.0 * m)) * (3.0 / m).sqrt();
    if !(-1.0..=1.0).contains(&arg) {
        return None;
    }
    Some(2.0 * (m / 3.0).sqrt() * (arg.acos() / 3.0).cos())
}

/// Root of an increasing `f` on `[lo, hi]` with `f(lo) < 0 < f(hi)`.
fn bracketed_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let ft = f(t);
        if ft == 0.0 {
            return t;
        }
        if ft < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - ft / df(t);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = tol.max(f64::EPSILON) * (1.0 + hi);
        if (next - t).abs() <= scale || hi - lo <= scale {
            return next;
        }
        t = next;
    }
    t
}
