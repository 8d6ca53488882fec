//! Min-max direction subproblem
//!
//! ```text
//! min_w  max_i <a_i, w> + 1/2 w' M w
//! ```
//!
//! solved through its simplex dual
//!
//! ```text
//! min_{lambda in simplex}  1/2 a(lambda)' M^-1 a(lambda),
//! a(lambda) = sum_i lambda_i a_i,
//! ```
//!
//! by the Frank-Wolfe method with exact segment line search. The primal
//! minimizer is recovered as w = -M^-1 a(lambda). A closed-form m = 2 solver
//! doubles as an independent test oracle for the iterative path.

use thiserror::Error;

use crate::linalg::{dot, LinalgError, SpdMatrix};

#[derive(Debug, Error)]
pub enum QpError {
    #[error("metric matrix rejected: {0}")]
    Metric(#[from] LinalgError),
    #[error("instance needs at least one objective vector")]
    Empty,
    #[error("objective vectors must share one dimension")]
    DimensionMismatch,
    #[error("gap tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("closed-form oracle requires m = 2, got m = {0}")]
    NotTwoObjectives(usize),
}

/// Metric of the quadratic term: the BB subproblem uses the identity, the
/// subspace subproblem a 2x2 positive definite model matrix.
#[derive(Debug, Clone)]
pub enum Metric {
    Identity,
    Spd(SpdMatrix),
}

impl Metric {
    fn apply_inverse(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Metric::Identity => b.to_vec(),
            Metric::Spd(m) => m.solve(b),
        }
    }

    fn quad_form(&self, x: &[f64]) -> f64 {
        match self {
            Metric::Identity => dot(x, x),
            Metric::Spd(m) => m.quad_form(x),
        }
    }
}

/// One min-max instance: m coefficient vectors in R^p plus the SPD metric.
#[derive(Debug, Clone)]
pub struct MinMaxInstance {
    a: Vec<Vec<f64>>,
    metric: Metric,
}

impl MinMaxInstance {
    /// Instance with M = I.
    pub fn euclidean(a: Vec<Vec<f64>>) -> Result<Self, QpError> {
        Self::with_metric(a, Metric::Identity)
    }

    pub fn with_metric(a: Vec<Vec<f64>>, metric: Metric) -> Result<Self, QpError> {
        if a.is_empty() {
            return Err(QpError::Empty);
        }
        let p = a[0].len();
        if a.iter().any(|ai| ai.len() != p) {
            return Err(QpError::DimensionMismatch);
        }
        if let Metric::Spd(m) = &metric {
            if m.n() != p {
                return Err(QpError::DimensionMismatch);
            }
        }
        Ok(Self { a, metric })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn p(&self) -> usize {
        self.a[0].len()
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.a
    }

    fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        for (li, ai) in lambda.iter().zip(&self.a) {
            crate::linalg::axpy(*li, ai, &mut out);
        }
        out
    }
}

/// Solution of the dual problem with the recovered primal minimizer.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// Simplex weights.
    pub lambda: Vec<f64>,
    /// Primal minimizer w = -M^-1 a(lambda).
    pub w: Vec<f64>,
    /// Optimal value of the min-max problem, always <= 0.
    pub theta: f64,
    /// Frank-Wolfe duality gap at exit.
    pub gap: f64,
    /// False when the gap tolerance was not reached before the iterate
    /// stalled or the iteration cap hit; the best iterate is still returned.
    pub converged: bool,
}

/// Frank-Wolfe solve of the simplex dual.
pub fn dual_solve(inst: &MinMaxInstance, tol: f64, max_iter: usize) -> Result<DualSolution, QpError> {
    if !(tol > 0.0) {
        return Err(QpError::InvalidTolerance(tol));
    }
    let m = inst.m();

    // All-zero coefficients: every lambda is optimal; return the uniform one.
    if inst.a.iter().all(|ai| ai.iter().all(|&v| v == 0.0)) {
        return Ok(DualSolution {
            lambda: vec![1.0 / m as f64; m],
            w: vec![0.0; inst.p()],
            theta: 0.0,
            gap: 0.0,
            converged: true,
        });
    }

    let mut lambda = vec![1.0 / m as f64; m];
    let mut converged = false;
    for _ in 0..max_iter {
        debug_assert!(
            lambda.iter().all(|&l| l >= -1e-15)
                && (lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
            "lambda left the simplex"
        );
        let a_lam = inst.combine(&lambda);
        let w = crate::linalg::scale(-1.0, &inst.metric.apply_inverse(&a_lam));
        // Dual gradient coordinate j is <a_j, M^-1 a(lambda)> = -<a_j, w>.
        let grad: Vec<f64> = inst.a.iter().map(|ai| -dot(ai, &w)).collect();
        let (j_star, &g_min) = grad
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
            .unwrap();
        let gap = dot(&lambda, &grad) - g_min;
        if gap <= tol {
            converged = true;
            break;
        }
        // Exact line search toward vertex j*: the dual objective restricted
        // to the segment is a 1-D quadratic with minimizer gap / (b' M^-1 b).
        let b = crate::linalg::sub(&inst.a[j_star], &a_lam);
        let denom = dot(&b, &inst.metric.apply_inverse(&b));
        if !(denom > 0.0) {
            break;
        }
        let gamma = (gap / denom).min(1.0);
        if gamma <= 0.0 {
            break;
        }
        for (i, li) in lambda.iter_mut().enumerate() {
            *li *= 1.0 - gamma;
            if i == j_star {
                *li += gamma;
            }
        }
        // Rescale to cancel rounding drift on the simplex constraint.
        let sum: f64 = lambda.iter().sum();
        for li in &mut lambda {
            *li /= sum;
        }
    }

    let a_lam = inst.combine(&lambda);
    let w = crate::linalg::scale(-1.0, &inst.metric.apply_inverse(&a_lam));
    let theta = 0.5 * dot(&a_lam, &w);
    let grad: Vec<f64> = inst.a.iter().map(|ai| -dot(ai, &w)).collect();
    let g_min = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = dot(&lambda, &grad) - g_min;
    if gap <= tol {
        converged = true;
    }
    Ok(DualSolution { lambda, w, theta, gap, converged })
}

/// Exact minimizer of the m = 2 dual: phi(t) = 1/2 ||t a_1 + (1-t) a_2||^2
/// in the M^-1 norm is a 1-D quadratic on [0, 1]. Ties (constant phi) break
/// toward t = 1/2.
pub fn closed_form_m2(inst: &MinMaxInstance) -> Result<DualSolution, QpError> {
    if inst.m() != 2 {
        return Err(QpError::NotTwoObjectives(inst.m()));
    }
    let u = crate::linalg::sub(&inst.a[0], &inst.a[1]);
    let minv_u = inst.metric.apply_inverse(&u);
    let minv_a2 = inst.metric.apply_inverse(&inst.a[1]);
    let uu = dot(&u, &minv_u);
    let t = if uu > 0.0 {
        (-dot(&u, &minv_a2) / uu).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let lambda = vec![t, 1.0 - t];
    let a_lam = inst.combine(&lambda);
    let w = crate::linalg::scale(-1.0, &inst.metric.apply_inverse(&a_lam));
    let theta = 0.5 * dot(&a_lam, &w);
    Ok(DualSolution { lambda, w, theta, gap: 0.0, converged: true })
}

/// The primal objective max_i <a_i, w> + 1/2 w' M w at an arbitrary w.
pub fn primal_value(inst: &MinMaxInstance, w: &[f64]) -> f64 {
    let worst = inst
        .a
        .iter()
        .map(|ai| dot(ai, w))
        .fold(f64::NEG_INFINITY, f64::max);
    worst + 0.5 * inst.metric.quad_form(w)
}

/// Dual objective phi(lambda) = 1/2 a(lambda)' M^-1 a(lambda); used by tests
/// to compare solver routes on equal footing.
pub fn dual_objective(inst: &MinMaxInstance, lambda: &[f64]) -> f64 {
    let a_lam = inst.combine(lambda);
    0.5 * dot(&a_lam, &inst.metric.apply_inverse(&a_lam))
}
