//! Random bi-objective quadratic generator with exact condition-number
//! control: F_i(x) = 1/2 <x, A_i x> + <b_i, x> with A_i = H_i D_i H_i',
//! H_i a Haar-random orthogonal matrix and D_i a diagonal of random
//! eigenvalues whose extreme ratio is exactly kappa_i.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::problem::{Problem, ProblemError};

#[derive(Debug, Error)]
pub enum QuadraticSpecError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("condition number must be >= 1, got {0}")]
    InvalidKappa(f64),
    #[error("box scale must be positive and finite, got {0}")]
    InvalidBoxScale(f64),
}

/// Recipe for one random quadratic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub n: usize,
    /// Target condition numbers (kappa_1, kappa_2) of the two Hessians.
    pub kappa: (f64, f64),
    pub seed: u64,
    /// Sampling box is `box_scale * [-1, 1]^n`.
    pub box_scale: f64,
}

impl QuadraticSpec {
    /// Spec with the benchmark-table box convention `box_scale = n`.
    pub fn new(n: usize, kappa: (f64, f64), seed: u64) -> Self {
        Self { n, kappa, seed, box_scale: n as f64 }
    }

    pub fn validate(&self) -> Result<(), QuadraticSpecError> {
        if self.n < 2 {
            return Err(QuadraticSpecError::DimensionTooSmall(self.n));
        }
        for &k in [&self.kappa.0, &self.kappa.1] {
            if !(k >= 1.0) || !k.is_finite() {
                return Err(QuadraticSpecError::InvalidKappa(k));
            }
        }
        if !(self.box_scale > 0.0) || !self.box_scale.is_finite() {
            return Err(QuadraticSpecError::InvalidBoxScale(self.box_scale));
        }
        Ok(())
    }
}

/// The raw matrices behind a generated instance, exposed so tests can run
/// eigenvalue/Cholesky oracles and matrix-product cross-checks against the
/// closures inside the `Problem`.
#[derive(Debug, Clone)]
pub struct QuadraticParts {
    pub mats: Vec<DenseMatrix>,
    pub linear: Vec<Vec<f64>>,
}

/// Haar-random orthogonal matrix: QR of a standard Gaussian matrix with the
/// R diagonal sign-corrected.
fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Eigenvalue draw: n values uniform on [kappa^-1/2, kappa^1/2] with the
/// extreme pair forced so the ratio is exactly kappa, shuffled.
fn eigenvalues_with_ratio<R: Rng + ?Sized>(n: usize, kappa: f64, rng: &mut R) -> Vec<f64> {
    let hi = kappa.sqrt();
    let lo = 1.0 / hi;
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    // Force the endpoints so the extreme ratio is exact.
    d[0] = lo;
    d[n - 1] = hi;
    d.shuffle(rng);
    d
}

/// Builds the matrices and linear terms of a spec without wrapping them in a
/// `Problem`. Deterministic: the same spec always yields bit-identical parts.
pub fn make_quadratic_parts(spec: &QuadraticSpec) -> Result<QuadraticParts, QuadraticSpecError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mats = Vec::with_capacity(2);
    let mut linear = Vec::with_capacity(2);
    for &kappa in &[spec.kappa.0, spec.kappa.1] {
        let h = random_orthogonal(n, &mut rng);
        let d = eigenvalues_with_ratio(n, kappa, &mut rng);
        // A = H D H', assembled column-scaled then symmetrized so the stored
        // matrix is exactly symmetric.
        let mut hd = h.clone();
        for j in 0..n {
            for i in 0..n {
                hd[(i, j)] *= d[j];
            }
        }
        let a = &hd * h.transpose();
        let mut dense = DenseMatrix::from_rows(n, a.as_slice().to_vec());
        // nalgebra stores column-major; symmetrization makes layout moot.
        dense.symmetrize();
        mats.push(dense);
        linear.push((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    Ok(QuadraticParts { mats, linear })
}

/// Generates the bi-objective problem described by the spec.
pub fn make_quadratic(spec: &QuadraticSpec) -> Result<Problem, QuadraticSpecError> {
    let parts = make_quadratic_parts(spec)?;
    let name = format!("qp(n={},k1={},k2={},seed={})", spec.n, spec.kappa.0, spec.kappa.1, spec.seed);
    let problem = quadratic_problem(name, parts, spec.box_scale);
    Ok(problem)
}

/// Wraps generated parts in a `Problem` with box `scale * [-1, 1]^n`.
pub fn quadratic_problem(name: impl Into<String>, parts: QuadraticParts, box_scale: f64) -> Problem {
    let n = parts.mats[0].n();
    match Problem::quadratic(
        name,
        parts.mats,
        parts.linear,
        vec![-box_scale; n],
        vec![box_scale; n],
    ) {
        Ok(p) => p,
        // Bounds are finite and ordered by construction.
        Err(ProblemError::InvalidBounds { .. }) | Err(_) => unreachable!(),
    }
}
