//! Search-direction machinery: per-objective Barzilai-Borwein scales, the BB
//! descent direction, the two-dimensional subspace model built from gradient
//! finite differences, the scaled modified Cholesky repair, and the subspace
//! direction solve with its KKT quantities.

use thiserror::Error;

use crate::linalg::{dot, norm, DenseMatrix, Sym2};
use crate::problem::{gradients, EvalCounters, EvalFault, Problem};
use crate::qp::{dual_solve, DualSolution, Metric, MinMaxInstance, QpError};
use crate::linalg::SpdMatrix;

#[derive(Debug, Error)]
pub enum DirectionError {
    #[error("dual subproblem failed: {0}")]
    Qp(#[from] QpError),
    #[error("degenerate subspace: {what} has zero norm")]
    DegenerateSubspace { what: &'static str },
    #[error("Wolfe guarantee broken: curvature surrogate rho2 = {value:.6e} <= 0")]
    CurvatureContract { value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalFault),
}

/// Frank-Wolfe settings for the dual subproblem solves.
#[derive(Debug, Clone, Copy)]
pub struct FwSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl FwSettings {
    /// Default budget for m objectives: gap tolerance 1e-10, 10m + 200 steps.
    pub fn for_objectives(m: usize) -> Self {
        Self { tol: 1e-10, max_iter: 10 * m + 200 }
    }

    pub fn with_tol(tol: f64, m: usize) -> Self {
        Self { tol, max_iter: 10 * m + 200 }
    }
}

/// Per-objective positive scale factors, each clamped to [alpha_min, alpha_max].
#[derive(Debug, Clone, PartialEq)]
pub struct BBScales(pub Vec<f64>);

impl BBScales {
    pub fn uniform(m: usize, value: f64) -> Self {
        Self(vec![value; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Applies the three-branch rule to every objective's (s, y_i) pair.
    pub fn compute(
        s: &[f64],
        ys: &[Vec<f64>],
        denom: f64,
        ynorm_denom: f64,
        bounds: (f64, f64),
    ) -> Self {
        Self(
            ys.iter()
                .map(|y| bb_scale(s, y, denom, ynorm_denom, bounds))
                .collect(),
        )
    }
}

/// Three-branch spectral scale:
/// - <s, y> > 0: clamp(<s, y> / denom)
/// - <s, y> < 0: clamp(||y|| / ynorm_denom)
/// - <s, y> = 0: alpha_min
///
/// The plain rule uses denom = ||s||^2 and ynorm_denom = ||s||; the subspace
/// variant substitutes the curvature surrogate rho2 and the aggregated
/// gradient-difference norm.
pub fn bb_scale(s: &[f64], y: &[f64], denom: f64, ynorm_denom: f64, bounds: (f64, f64)) -> f64 {
    debug_assert!(denom > 0.0 && ynorm_denom > 0.0);
    let (alpha_min, alpha_max) = bounds;
    let sy = dot(s, y);
    if sy > 0.0 {
        (sy / denom).clamp(alpha_min, alpha_max)
    } else if sy < 0.0 {
        (norm(y) / ynorm_denom).clamp(alpha_min, alpha_max)
    } else {
        alpha_min
    }
}

/// Which route produced a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    BbOnly,
    Subspace,
}

/// A computed search direction with its dual certificate.
#[derive(Debug, Clone)]
pub struct DirectionResult {
    pub d: Vec<f64>,
    /// Subspace coefficients; (1, 0) on the BB-only route where d = v.
    pub mu: f64,
    pub nu: f64,
    pub lambda_bar: Vec<f64>,
    /// Optimal value of the direction subproblem (<= 0; 0 only at criticality).
    pub theta: f64,
    /// Scaled worst-case directional value predicted by the dual solution,
    /// equal to 2*theta.
    pub d_value: f64,
    pub kind: DirectionKind,
    /// Frank-Wolfe duality gap of the underlying dual solve.
    pub fw_gap: f64,
}

/// Everything carried over from the previous iteration.
#[derive(Debug, Clone)]
pub struct IterateMemory {
    /// s_{k-1} = x_k - x_{k-1} = t_{k-1} d_{k-1}.
    pub s: Vec<f64>,
    /// Per-objective gradient differences across the last step.
    pub y: Vec<Vec<f64>>,
    pub prev_lambda: Vec<f64>,
    pub prev_alpha_bar: BBScales,
    pub prev_grads: Vec<Vec<f64>>,
    pub prev_direction: Vec<f64>,
    pub prev_step: f64,
    /// Directional value recorded at line-search exit at the new point.
    pub prev_d_value: f64,
}

/// The two-dimensional model of the direction subproblem.
#[derive(Debug, Clone)]
pub struct SubspaceModel {
    /// Coefficient 2-vectors (<g_i / abar_i, v>, <g_i / abar_i, s>).
    pub a: Vec<[f64; 2]>,
    /// Model matrix; positive definite only after the repair step.
    pub h: Sym2,
    /// Diagonal scaling (||v||, ||s||).
    pub d: (f64, f64),
    pub rho1: f64,
    pub rho2: f64,
}

/// Solves the BB direction subproblem with coefficients g_i / alpha_i and the
/// Euclidean metric; the minimizer v vanishes exactly at critical points.
pub fn bb_direction(
    grads: &[Vec<f64>],
    alpha: &BBScales,
    fw: FwSettings,
) -> Result<DirectionResult, DirectionError> {
    let a: Vec<Vec<f64>> = grads
        .iter()
        .zip(alpha.values())
        .map(|(g, &ai)| g.iter().map(|gj| gj / ai).collect())
        .collect();
    let inst = MinMaxInstance::euclidean(a)?;
    let DualSolution { lambda, w, gap, .. } = dual_solve(&inst, fw.tol, fw.max_iter)?;
    let v_sq = dot(&w, &w);
    Ok(DirectionResult {
        d: w,
        mu: 1.0,
        nu: 0.0,
        lambda_bar: lambda,
        theta: -0.5 * v_sq,
        d_value: -v_sq,
        kind: DirectionKind::BbOnly,
        fw_gap: gap,
    })
}

/// Aggregated gradient difference across the last step,
/// sum_i (lambda_i / abar_i) (g_i(x_k) - g_i(x_{k-1})); estimates the
/// weighted-Hessian product B s_{k-1} without touching a matrix.
pub fn aggregate_y(
    grads_k: &[Vec<f64>],
    grads_km1: &[Vec<f64>],
    lambda_prev: &[f64],
    alpha_bar_prev: &BBScales,
) -> Vec<f64> {
    let n = grads_k[0].len();
    let mut out = vec![0.0; n];
    for ((gk, gp), (&li, &ai)) in grads_k
        .iter()
        .zip(grads_km1)
        .zip(lambda_prev.iter().zip(alpha_bar_prev.values()))
    {
        let w = li / ai;
        for j in 0..n {
            out[j] += w * (gk[j] - gp[j]);
        }
    }
    out
}

/// Same estimate along the BB direction: finite difference at x_k - v_k,
/// costing one extra gradient bundle.
pub fn aggregate_yv(
    problem: &Problem,
    x_k: &[f64],
    v_k: &[f64],
    grads_k: &[Vec<f64>],
    lambda_prev: &[f64],
    alpha_bar_prev: &BBScales,
    counters: &mut EvalCounters,
) -> Result<Vec<f64>, EvalFault> {
    let shifted = crate::linalg::sub(x_k, v_k);
    let grads_shifted = gradients(problem, &shifted, counters)?;
    Ok(aggregate_y(grads_k, &grads_shifted, lambda_prev, alpha_bar_prev))
}

/// Curvature surrogate along the last step. Uses <s, y> when that is
/// positive; otherwise falls back to the directional-value difference, which
/// a Wolfe-accepted step keeps positive. The first term exploits positive
/// homogeneity: D(x_k, s_{k-1}) = t_{k-1} * D(x_k, d_{k-1}), the latter
/// recorded at line-search exit.
pub fn rho2(mem: &IterateMemory, y: &[f64]) -> Result<f64, DirectionError> {
    let sy = dot(&mem.s, y);
    if sy > 0.0 {
        return Ok(sy);
    }
    let d_on_s = mem.prev_step * mem.prev_d_value;
    let lower: f64 = mem
        .prev_grads
        .iter()
        .zip(mem.prev_lambda.iter().zip(mem.prev_alpha_bar.values()))
        .map(|(g, (&li, &ai))| li * dot(g, &mem.s) / ai)
        .sum();
    let value = d_on_s - lower;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(DirectionError::CurvatureContract { value })
    }
}

/// Curvature surrogate along the BB direction: <v, y_v> when positive, else
/// the product of norms.
pub fn rho1(v: &[f64], y_v: &[f64]) -> f64 {
    let c = dot(v, y_v);
    if c > 0.0 {
        c
    } else {
        norm(v) * norm(y_v)
    }
}

/// Assembles the 2D model coefficients, the (not yet repaired) model matrix
/// and the diagonal scaling.
pub fn assemble_model(
    grads: &[Vec<f64>],
    alpha_bar: &BBScales,
    v: &[f64],
    s: &[f64],
    y: &[f64],
    rho1: f64,
    rho2: f64,
) -> Result<SubspaceModel, DirectionError> {
    let v_norm = norm(v);
    let s_norm = norm(s);
    if v_norm == 0.0 {
        return Err(DirectionError::DegenerateSubspace { what: "v" });
    }
    if s_norm == 0.0 {
        return Err(DirectionError::DegenerateSubspace { what: "s" });
    }
    let a = grads
        .iter()
        .zip(alpha_bar.values())
        .map(|(g, &ai)| [dot(g, v) / ai, dot(g, s) / ai])
        .collect();
    Ok(SubspaceModel {
        a,
        h: Sym2::new(rho1, dot(v, y), rho2),
        d: (v_norm, s_norm),
        rho1,
        rho2,
    })
}

/// Scaled modified Cholesky repair: factor D^-1 H D^-1 with clamped pivots,
/// rebuild from the factor, scale back. The result always admits a plain
/// Cholesky factorization. The pivot tests are intentionally asymmetric
/// (first pivot compares the square root against c1, second compares the
/// value); both replace a failing pivot by sqrt(c2).
pub fn modified_cholesky(h: Sym2, d: (f64, f64), c1: f64, c2: f64) -> Sym2 {
    debug_assert!(d.0 > 0.0 && d.1 > 0.0, "diagonal scaling must be positive");
    debug_assert!(0.0 < c1 && c1 <= c2);
    let hat11 = h.h11 / (d.0 * d.0);
    let hat21 = h.h12 / (d.0 * d.1);
    let hat22 = h.h22 / (d.1 * d.1);
    // sqrt(hat11) > c1 is equivalent to hat11 > c1^2 for hat11 >= 0 and
    // routes negative values (sqrt would be NaN) to the repair branch.
    let l11 = if hat11 > c1 * c1 { hat11.sqrt() } else { c2.sqrt() };
    let l21 = hat21 / l11;
    let rest = hat22 - l21 * l21;
    let l22 = if rest > c1 { rest.sqrt() } else { c2.sqrt() };
    let r11 = l11 * l11;
    let r21 = l11 * l21;
    let r22 = l21 * l21 + l22 * l22;
    Sym2::new(r11 * d.0 * d.0, r21 * d.0 * d.1, r22 * d.1 * d.1)
}

/// Solves the subspace direction subproblem with the repaired model matrix
/// and maps the 2D solution back to R^n: d = mu v + nu s.
pub fn subspace_direction(
    model: &SubspaceModel,
    v: &[f64],
    s: &[f64],
    fw: FwSettings,
) -> Result<DirectionResult, DirectionError> {
    let a: Vec<Vec<f64>> = model.a.iter().map(|ai| ai.to_vec()).collect();
    let metric = SpdMatrix::new(DenseMatrix::from_rows(
        2,
        vec![model.h.h11, model.h.h12, model.h.h12, model.h.h22],
    ))
    .map_err(QpError::Metric)?;
    let inst = MinMaxInstance::with_metric(a, Metric::Spd(metric))?;
    let DualSolution { lambda, w, gap, .. } = dual_solve(&inst, fw.tol, fw.max_iter)?;
    let (mu, nu) = (w[0], w[1]);
    let d = crate::linalg::lin_comb(mu, v, nu, s);
    let d_value = -model.h.quad_form(&[mu, nu]);
    Ok(DirectionResult {
        d,
        mu,
        nu,
        lambda_bar: lambda,
        theta: 0.5 * d_value,
        d_value,
        kind: DirectionKind::Subspace,
        fw_gap: gap,
    })
}

/// Scaled worst-case directional value D_alpha(x, d) = max_i <g_i / alpha_i, d>.
pub fn directional_value(grads: &[Vec<f64>], alpha: &BBScales, d: &[f64]) -> f64 {
    grads
        .iter()
        .zip(alpha.values())
        .map(|(g, &ai)| dot(g, d) / ai)
        .fold(f64::NEG_INFINITY, f64::max)
}
