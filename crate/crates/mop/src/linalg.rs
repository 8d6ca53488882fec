//! Dense vector/matrix helpers used throughout the solver.
//!
//! Everything here operates on plain `&[f64]` slices; problem dimensions are
//! small enough (n <= ~1000) that hand-rolled kernels beat pulling a BLAS
//! binding into the dependency tree.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {len} entries")]
    NotSquare { len: usize },
    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {residual:.3e}")]
    NotSymmetric { i: usize, j: usize, residual: f64 },
    #[error("matrix is not positive definite (pivot {pivot} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `a*x + b*y` as a new vector.
pub fn lin_comb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    lin_comb(1.0, x, -1.0, y)
}

pub fn scale(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| a * xi).collect()
}

/// `y += a*x` in place.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must hold n*n entries");
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| dot(row, x))
            .collect()
    }

    /// x' A x without forming A x separately.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.data
            .chunks_exact(self.n)
            .zip(x)
            .map(|(row, xi)| xi * dot(row, x))
            .sum()
    }

    /// Largest |a_ij - a_ji| over all pairs.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replace A by (A + A')/2.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Symmetric positive definite matrix with its Cholesky factor, so repeated
/// solves against the same matrix reuse one factorization.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    mat: DenseMatrix,
    /// Lower-triangular Cholesky factor, row-major (upper part unused).
    chol: Vec<f64>,
}

impl SpdMatrix {
    /// Validates symmetry (scaled tolerance 1e-12) and factors the matrix.
    pub fn new(mat: DenseMatrix) -> Result<Self, LinalgError> {
        let n = mat.n;
        for i in 0..n {
            for j in 0..i {
                let residual = (mat[(i, j)] - mat[(j, i)]).abs();
                let scale = 1.0 + mat[(i, j)].abs() + mat[(j, i)].abs();
                if residual > 1e-12 * scale {
                    return Err(LinalgError::NotSymmetric { i, j, residual });
                }
            }
        }
        let chol = cholesky_lower(&mat)?;
        Ok(Self { mat, chol })
    }

    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.mat.matvec(x)
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mat.quad_form(x)
    }

    /// Solves M z = b via the cached factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        debug_assert_eq!(b.len(), n);
        let l = &self.chol;
        // Forward: L y = b
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        // Backward: L' z = y
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        z
    }
}

/// Plain Cholesky factorization A = L L'; fails on a non-positive pivot.
pub fn cholesky_lower(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = a.n;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(LinalgError::NotPositiveDefinite { col: i, pivot: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Symmetric 2x2 matrix, the shape of the subspace model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl Sym2 {
    pub fn new(h11: f64, h12: f64, h22: f64) -> Self {
        Self { h11, h12, h22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    /// Eigenvalues in ascending order (closed form).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.h11 + self.h22;
        let det = self.h11 * self.h22 - self.h12 * self.h12;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        (0.5 * (tr - disc), 0.5 * (tr + disc))
    }

    pub fn quad_form(&self, w: &[f64; 2]) -> f64 {
        self.h11 * w[0] * w[0] + 2.0 * self.h12 * w[0] * w[1] + self.h22 * w[1] * w[1]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_rows(2, vec![self.h11, self.h12, self.h12, self.h22])
    }
}
