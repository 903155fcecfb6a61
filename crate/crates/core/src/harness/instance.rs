use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::linalg::norm2;
use crate::solver::{MatrixProblem, VectorProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    GaussianNormalized,
    /// Realified `[F | I]` with the unitary DFT `F`; needs `n = 2m`.
    FourierIdentity,
    /// `p × (rows·cols)` Gaussian operator with `N(0, 1/p)` entries and a
    /// low-rank ground truth; `card_*` bound the rank.
    MatrixGaussianOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    /// Measurements (complex measurements for `fourier_identity`).
    pub m: usize,
    /// Unknowns; ignored for matrix instances.
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub rows: usize,
    #[serde(default)]
    pub cols: usize,
    pub card_min: usize,
    pub card_max: usize,
    #[serde(default = "default_floor")]
    pub mag_min: f64,
    #[serde(default)]
    pub noise_level: f64,
    pub seed: u64,
}

fn default_floor() -> f64 {
    2.0 * 2f64.sqrt()
}

impl InstanceSpec {
    pub fn gaussian(m: usize, n: usize, card: usize, noise_level: f64, seed: u64) -> Self {
        Self {
            kind: InstanceKind::GaussianNormalized,
            m,
            n,
            rows: 0,
            cols: 0,
            card_min: card,
            card_max: card,
            mag_min: default_floor(),
            noise_level,
            seed,
        }
    }

    pub fn unknowns(&self) -> usize {
        match self.kind {
            InstanceKind::MatrixGaussianOp => self.rows * self.cols,
            _ => self.n,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
        let cap = match self.kind {
            InstanceKind::MatrixGaussianOp => self.rows.min(self.cols),
            _ => self.n,
        };
        if self.card_min > self.card_max || self.card_max > cap {
            return bad(format!(
                "cardinality range {}..={} does not fit {cap}",
                self.card_min, self.card_max
            ));
        }
        if !(self.mag_min > 0.0) {
            return bad(format!("mag_min must be positive, got {}", self.mag_min));
        }
        if !(0.0..1.0).contains(&self.noise_level) {
            return bad(format!("noise_level must lie in [0, 1), got {}", self.noise_level));
        }
        if self.kind == InstanceKind::FourierIdentity && self.n != 2 * self.m {
            return bad(format!("fourier_identity needs n = 2m, got m={} n={}", self.m, self.n));
        }
        if self.m == 0 || self.unknowns() == 0 {
            return bad("empty dimensions".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Vector(VectorProblem),
    Matrix(MatrixProblem),
}

impl Problem {
    pub fn as_vector(&self) -> Option<&VectorProblem> {
        match self {
            Problem::Vector(p) => Some(p),
            Problem::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&MatrixProblem> {
        match self {
            Problem::Matrix(p) => Some(p),
            Problem::Vector(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub problem: Problem,
    /// Ground truth; column-major `vec(X₀)` for matrix instances.
    pub x_true: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Generator for trial `stream` of the spec's seed.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Same as [`gen_instance_trial`] with trial index 0.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance, HarnessError> {
    gen_instance_trial(spec, 0)
}

/// Draws an instance from the stream `(spec.seed, trial)`.
pub fn gen_instance_trial(spec: &InstanceSpec, trial: u64) -> Result<Instance, HarnessError> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, trial);
    let (problem_a, x_true, realified) = match spec.kind {
        InstanceKind::GaussianNormalized => {
            let a = normalized_gaussian(&mut rng, spec.m, spec.n);
            let x = sparse_truth(&mut rng, spec);
            (a, x, false)
        }
        InstanceKind::FourierIdentity => {
            let a = fourier_identity(spec.m);
            let x = sparse_truth(&mut rng, spec);
            (a, x, true)
        }
        InstanceKind::MatrixGaussianOp => {
            let p = spec.m;
            let scale = 1.0 / (p as f64).sqrt();
            let op = DMatrix::from_fn(p, spec.rows * spec.cols, |_, _| {
                scale * rng.sample::<f64, _>(StandardNormal)
            });
            let x = low_rank_truth(&mut rng, spec);
            (op, x, false)
        }
    };
    let b0: Vec<f64> = (&problem_a * DVector::from_column_slice(&x_true))
        .iter()
        .copied()
        .collect();
    let eps = noise(&mut rng, &b0, spec.noise_level)?;
    let b: Vec<f64> = b0.iter().zip(&eps).map(|(u, v)| u + v).collect();
    let problem = match spec.kind {
        InstanceKind::MatrixGaussianOp => {
            Problem::Matrix(MatrixProblem::new(problem_a, b, spec.rows, spec.cols)?)
        }
        _ => Problem::Vector(VectorProblem::with_pairing(problem_a, b, realified)?),
    };
    Ok(Instance {
        problem,
        x_true,
        eps,
    })
}

pub fn normalized_gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in a.column_iter_mut() {
        let nrm = col.norm();
        col /= nrm;
    }
    a
}

/// Realified `[F | I]`: rows `0..m` hold real parts, rows `m..2m` imaginary
/// parts, with `F_{jk} = e^{−2πijk/m}/√m`.
pub fn fourier_identity(m: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    let scale = 1.0 / (m as f64).sqrt();
    for j in 0..m {
        for k in 0..m {
            // reduce jk mod m before scaling to keep the angle exact
            let theta = -2.0 * std::f64::consts::PI * ((j * k) % m) as f64 / m as f64;
            a[(j, k)] = scale * theta.cos();
            a[(m + j, k)] = scale * theta.sin();
        }
        a[(j, m + j)] = 1.0;
    }
    a
}

/// Paley construction of a `(q+1) × (q+1)` Hadamard matrix for a prime
/// `q ≡ 3 (mod 4)`: `H = I + S` with `S = [[0, 1ᵀ], [−1, Q]]` and `Q` the
/// Jacobsthal matrix of the quadratic character.
pub fn paley_hadamard(q: usize) -> Result<DMatrix<f64>, HarnessError> {
    let is_prime = q >= 3 && (2..q).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d));
    if !is_prime || q % 4 != 3 {
        return Err(HarnessError::InvalidSpec(format!(
            "Paley construction needs a prime q = 3 mod 4, got {q}"
        )));
    }
    let mut residue = vec![false; q];
    for x in 1..q {
        residue[(x * x) % q] = true;
    }
    let chi = |v: usize| -> f64 {
        if v == 0 {
            0.0
        } else if residue[v] {
            1.0
        } else {
            -1.0
        }
    };
    let n = q + 1;
    let mut h = DMatrix::identity(n, n);
    for j in 1..n {
        h[(0, j)] += 1.0;
        h[(j, 0)] -= 1.0;
    }
    for i in 0..q {
        for j in 0..q {
            h[(i + 1, j + 1)] += chi((j + q - i) % q);
        }
    }
    Ok(h)
}

fn sparse_truth(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> Vec<f64> {
    let card = rng.random_range(spec.card_min..=spec.card_max);
    let mut x = vec![0.0; spec.n];
    for i in rand::seq::index::sample(rng, spec.n, card) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x[i] = sign * rng.random_range(spec.mag_min..=4.0 * spec.mag_min);
    }
    x
}

fn low_rank_truth(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> Vec<f64> {
    let rank = rng.random_range(spec.card_min..=spec.card_max);
    let (r, c) = (spec.rows, spec.cols);
    let mut x = DMatrix::zeros(r, c);
    if rank > 0 {
        let u = DMatrix::from_fn(r, rank, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
        let v = DMatrix::from_fn(c, rank, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
        let s: Vec<f64> = (0..rank)
            .map(|_| rng.random_range(spec.mag_min..=4.0 * spec.mag_min))
            .collect();
        x = u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose();
    }
    x.as_slice().to_vec()
}

/// Noise `t·u` with `u` uniform on the sphere and `t` the positive root of
/// `t = level·‖b₀ + t u‖`.
fn noise(rng: &mut ChaCha8Rng, b0: &[f64], level: f64) -> Result<Vec<f64>, HarnessError> {
    let dir: Vec<f64> = (0..b0.len()).map(|_| rng.sample(StandardNormal)).collect();
    if level == 0.0 {
        return Ok(vec![0.0; b0.len()]);
    }
    let nb = norm2(b0);
    if nb == 0.0 {
        return Err(HarnessError::InfeasibleNoiseLevel(level));
    }
    let nd = norm2(&dir);
    let u: Vec<f64> = dir.iter().map(|v| v / nd).collect();
    let beta: f64 = b0.iter().zip(&u).map(|(p, q)| p * q).sum();
    let l2 = level * level;
    let t = (l2 * beta + level * (l2 * beta * beta + (1.0 - l2) * nb * nb).sqrt()) / (1.0 - l2);
    if !(t > 0.0) {
        return Err(HarnessError::InfeasibleNoiseLevel(level));
    }
    Ok(u.into_iter().map(|v| t * v).collect())
}
