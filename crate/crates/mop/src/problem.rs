//! Problem abstraction: a bundle of m differentiable objectives over R^n with
//! box bounds used only for sampling start points, plus per-solve evaluation
//! counters.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::linalg::DenseMatrix;

pub type ObjectiveFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type GradientFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("lower bound exceeds upper bound at component {index}: {lower} > {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("problem must have at least one objective")]
    NoObjectives,
    #[error("problem must have at least one variable")]
    NoVariables,
}

/// Evaluation fault: an objective or gradient produced NaN/Inf. Carries the
/// offending point so a failed benchmark run can be reproduced.
#[derive(Debug, Clone, Error)]
pub enum EvalFault {
    #[error("objective {objective} is not finite at x = {x:?}")]
    Objective { objective: usize, x: Vec<f64> },
    #[error("gradient {objective} has a non-finite entry at x = {x:?}")]
    Gradient { objective: usize, x: Vec<f64> },
}

/// Counts whole-bundle evaluations: one `fevals` tick is one F(x) with all m
/// components, one `gevals` tick is all m gradients at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub fevals: u64,
    pub gevals: u64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }
}

/// An immutable m-objective problem. Shareable across concurrent solves;
/// evaluation counters are per-solve and live outside the problem.
#[derive(Clone)]
pub struct Problem {
    name: String,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objectives: Arc<ObjectiveFn>,
    gradients: Arc<GradientFn>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objectives: Arc<ObjectiveFn>,
        gradients: Arc<GradientFn>,
    ) -> Result<Self, ProblemError> {
        if m == 0 {
            return Err(ProblemError::NoObjectives);
        }
        if lower.is_empty() {
            return Err(ProblemError::NoVariables);
        }
        assert_eq!(lower.len(), upper.len(), "bound vectors must agree in length");
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l > u {
                return Err(ProblemError::InvalidBounds { index, lower: l, upper: u });
            }
        }
        Ok(Self {
            name: name.into(),
            n: lower.len(),
            m,
            lower,
            upper,
            objectives,
            gradients,
        })
    }

    /// Convenience constructor for quadratic bundles
    /// F_i(x) = 1/2 <x, A_i x> + <b_i, x>.
    pub fn quadratic(
        name: impl Into<String>,
        mats: Vec<DenseMatrix>,
        linear: Vec<Vec<f64>>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        assert_eq!(mats.len(), linear.len(), "one linear term per matrix");
        let m = mats.len();
        let mats = Arc::new(mats);
        let linear = Arc::new(linear);
        let (mats_g, linear_g) = (Arc::clone(&mats), Arc::clone(&linear));
        let objectives: Arc<ObjectiveFn> = Arc::new(move |x: &[f64]| {
            mats.iter()
                .zip(linear.iter())
                .map(|(a, b)| 0.5 * a.quad_form(x) + crate::linalg::dot(b, x))
                .collect()
        });
        let gradients: Arc<GradientFn> = Arc::new(move |x: &[f64]| {
            mats_g
                .iter()
                .zip(linear_g.iter())
                .map(|(a, b)| {
                    let mut g = a.matvec(x);
                    crate::linalg::axpy(1.0, b, &mut g);
                    g
                })
                .collect()
        });
        Self::new(name, m, lower, upper, objectives, gradients)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// Evaluates the objective bundle F(x), counting one bundle evaluation.
pub fn evaluate(
    problem: &Problem,
    x: &[f64],
    counters: &mut EvalCounters,
) -> Result<Vec<f64>, EvalFault> {
    assert_eq!(x.len(), problem.n, "point dimension must equal problem.n");
    counters.fevals += 1;
    let values = (problem.objectives)(x);
    debug_assert_eq!(values.len(), problem.m);
    if let Some(objective) = values.iter().position(|v| !v.is_finite()) {
        return Err(EvalFault::Objective { objective, x: x.to_vec() });
    }
    Ok(values)
}

/// Evaluates the gradient bundle, counting one bundle evaluation.
pub fn gradients(
    problem: &Problem,
    x: &[f64],
    counters: &mut EvalCounters,
) -> Result<Vec<Vec<f64>>, EvalFault> {
    assert_eq!(x.len(), problem.n, "point dimension must equal problem.n");
    counters.gevals += 1;
    let grads = (problem.gradients)(x);
    debug_assert_eq!(grads.len(), problem.m);
    for (objective, g) in grads.iter().enumerate() {
        debug_assert_eq!(g.len(), problem.n);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(EvalFault::Gradient { objective, x: x.to_vec() });
        }
    }
    Ok(grads)
}

/// Draws a start point uniformly (componentwise) from the problem box.
pub fn sample_start<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> Vec<f64> {
    problem
        .lower
        .iter()
        .zip(&problem.upper)
        .map(|(&l, &u)| if l == u { l } else { rng.random_range(l..=u) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn identity_pair(n: usize) -> Problem {
        Problem::quadratic(
            "ident-pair",
            vec![DenseMatrix::identity(n), DenseMatrix::identity(n)],
            vec![vec![0.0; n], vec![0.0; n]],
            vec![-1.0; n],
            vec![1.0; n],
        )
        .unwrap()
    }

    #[test]
    fn identity_quadratic_value() {
        let p = identity_pair(2);
        let mut c = EvalCounters::new();
        let f = evaluate(&p, &[1.0, 1.0], &mut c).unwrap();
        assert_eq!(f, vec![1.0, 1.0]);
        assert_eq!(c.fevals, 1);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let p = identity_pair(3);
        let mut c = EvalCounters::new();
        let x = [0.3, -0.7, 0.2];
        let f1 = evaluate(&p, &x, &mut c).unwrap();
        let f2 = evaluate(&p, &x, &mut c).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(c.fevals, 2);
    }

    #[test]
    fn gradient_of_half_norm_squared() {
        let p = Problem::quadratic(
            "sq",
            vec![DenseMatrix::identity(2)],
            vec![vec![0.0, 0.0]],
            vec![-10.0, -10.0],
            vec![10.0, 10.0],
        )
        .unwrap();
        let mut c = EvalCounters::new();
        let g = gradients(&p, &[3.0, -4.0], &mut c).unwrap();
        assert_eq!(g[0], vec![3.0, -4.0]);
        assert_eq!(c.gevals, 1);
    }

    #[test]
    fn zero_point_zero_gradient() {
        let p = identity_pair(4);
        let mut c = EvalCounters::new();
        let g = gradients(&p, &[0.0; 4], &mut c).unwrap();
        assert!(g.iter().all(|gi| gi.iter().all(|&v| v == 0.0)));
        let f = evaluate(&p, &[0.0; 4], &mut c).unwrap();
        assert_eq!(f, vec![0.0, 0.0]);
    }

    #[test]
    fn non_finite_objective_reports_fault_with_point() {
        let obj: Arc<ObjectiveFn> = Arc::new(|_x| vec![f64::NAN]);
        let grad: Arc<GradientFn> = Arc::new(|x| vec![x.to_vec()]);
        let p = Problem::new("nan", 1, vec![-1.0], vec![1.0], obj, grad).unwrap();
        let mut c = EvalCounters::new();
        match evaluate(&p, &[0.25], &mut c) {
            Err(EvalFault::Objective { objective, x }) => {
                assert_eq!(objective, 0);
                assert_eq!(x, vec![0.25]);
            }
            other => panic!("expected objective fault, got {other:?}"),
        }
    }

    #[test]
    fn counters_match_wrapping_spy() {
        let fe = Arc::new(AtomicU64::new(0));
        let ge = Arc::new(AtomicU64::new(0));
        let (fe2, ge2) = (Arc::clone(&fe), Arc::clone(&ge));
        let obj: Arc<ObjectiveFn> = Arc::new(move |x| {
            fe2.fetch_add(1, Ordering::Relaxed);
            vec![x[0] * x[0]]
        });
        let grad: Arc<GradientFn> = Arc::new(move |x| {
            ge2.fetch_add(1, Ordering::Relaxed);
            vec![vec![2.0 * x[0]]]
        });
        let p = Problem::new("spy", 1, vec![-1.0], vec![1.0], obj, grad).unwrap();
        let mut c = EvalCounters::new();
        for _ in 0..7 {
            evaluate(&p, &[0.5], &mut c).unwrap();
        }
        for _ in 0..3 {
            gradients(&p, &[0.5], &mut c).unwrap();
        }
        assert_eq!(c.fevals, fe.load(Ordering::Relaxed));
        assert_eq!(c.gevals, ge.load(Ordering::Relaxed));
        assert_eq!(c.fevals, 7);
        assert_eq!(c.gevals, 3);
    }

    #[test]
    fn degenerate_box_returns_the_point() {
        let p = Problem::quadratic(
            "point",
            vec![DenseMatrix::identity(2)],
            vec![vec![0.0, 0.0]],
            vec![1.5, -2.0],
            vec![1.5, -2.0],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_start(&p, &mut rng), vec![1.5, -2.0]);
    }

    #[test]
    fn sample_mean_near_box_center() {
        let p = Problem::quadratic(
            "unit",
            vec![DenseMatrix::identity(2)],
            vec![vec![0.0, 0.0]],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut mean = [0.0; 2];
        let samples = 10_000;
        for _ in 0..samples {
            let x = sample_start(&p, &mut rng);
            mean[0] += x[0];
            mean[1] += x[1];
        }
        for m in &mut mean {
            *m /= samples as f64;
            assert!(*m > 0.45 && *m < 0.55, "mean {m} outside [0.45, 0.55]");
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let p = identity_pair(5);
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..4).map(|_| sample_start(&p, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn invalid_bounds_rejected() {
        let obj: Arc<ObjectiveFn> = Arc::new(|_x| vec![0.0]);
        let grad: Arc<GradientFn> = Arc::new(|x| vec![vec![0.0; x.len()]]);
        let err = Problem::new("bad", 1, vec![1.0, 0.0], vec![0.0, 1.0], obj, grad);
        assert!(matches!(err, Err(ProblemError::InvalidBounds { index: 0, .. })));
    }
}
