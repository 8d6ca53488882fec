//! Multiobjective Wolfe line search.
//!
//! Along a descent direction d with scales abar and D0 = D_abar(x, d) < 0,
//! finds t > 0 satisfying both
//!
//!   (sufficient decrease)  (F_i(x + t d) - F_i(x)) / abar_i <= sigma1 t D0
//!                          for every objective i,
//!   (curvature)            D_abar(x + t d, d) >= sigma2 D0,
//!
//! by bracketing and bisection zoom: the initial trial grows while the
//! decrease condition holds but the slope is still too steep, and bisects as
//! soon as a bracket [holds, fails] exists.

use thiserror::Error;

use crate::direction::{directional_value, BBScales};
use crate::problem::{evaluate, gradients, EvalCounters, EvalFault, Problem};

#[derive(Debug, Clone, Copy)]
pub struct LineSearchConfig {
    /// Sufficient-decrease constant, 0 < sigma1 <= sigma2 < 1.
    pub sigma1: f64,
    /// Curvature constant.
    pub sigma2: f64,
    /// First trial step.
    pub t_init: f64,
    /// Bracket growth factor.
    pub expand: f64,
    /// Cap on objective-bundle evaluations inside one search.
    pub max_evals: usize,
    /// Upper safeguard on the trial step.
    pub t_max: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            sigma1: 1e-4,
            sigma2: 0.1,
            t_init: 1.0,
            expand: 2.0,
            max_evals: 50,
            t_max: 1e10,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        if !(0.0 < self.sigma1 && self.sigma1 <= self.sigma2 && self.sigma2 < 1.0) {
            return Err(LineSearchError::InvalidConfig {
                what: "requires 0 < sigma1 <= sigma2 < 1",
            });
        }
        if !(self.t_init > 0.0 && self.expand > 1.0 && self.t_max >= self.t_init) {
            return Err(LineSearchError::InvalidConfig {
                what: "requires t_init > 0, expand > 1, t_max >= t_init",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LineSearchError {
    #[error("line search config invalid: {what}")]
    InvalidConfig { what: &'static str },
    #[error("direction is not descent: D0 = {d0}")]
    NotDescent { d0: f64 },
    #[error("evaluation budget exhausted after {evals} trials; best decrease-feasible t = {best_t:?}")]
    Exhausted { evals: usize, best_t: Option<f64> },
    #[error(transparent)]
    Eval(#[from] EvalFault),
}

/// Accepted step with everything the caller needs to advance the iterate
/// without re-evaluating.
#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub t: f64,
    pub x_new: Vec<f64>,
    pub f_new: Vec<f64>,
    pub grads_new: Vec<Vec<f64>>,
    /// D_abar(x + t d, d) at acceptance.
    pub d_exit: f64,
    pub fevals_used: usize,
    pub gevals_used: usize,
}

/// Re-evaluates the two Wolfe conditions from raw quantities. Used both
/// inside the search and by post-hoc audits, so an audit replays exactly the
/// arithmetic that accepted the step.
pub fn check_wolfe(
    f_x: &[f64],
    f_new: &[f64],
    t: f64,
    d0: f64,
    d_new: f64,
    alpha_bar: &BBScales,
    sigma1: f64,
    sigma2: f64,
) -> (bool, bool) {
    let decrease = f_x
        .iter()
        .zip(f_new)
        .zip(alpha_bar.values())
        .all(|((fx, fn_), &ai)| (fn_ - fx) / ai <= sigma1 * t * d0);
    let curvature = d_new >= sigma2 * d0;
    (decrease, curvature)
}

fn sufficient_decrease(
    f_x: &[f64],
    f_new: &[f64],
    t: f64,
    d0: f64,
    alpha_bar: &BBScales,
    sigma1: f64,
) -> bool {
    f_x.iter()
        .zip(f_new)
        .zip(alpha_bar.values())
        .all(|((fx, fn_), &ai)| (fn_ - fx) / ai <= sigma1 * t * d0)
}

/// Wolfe search along d from x, where f_x = F(x) and d0 = D_abar(x, d) < 0.
pub fn wolfe_search(
    problem: &Problem,
    x: &[f64],
    f_x: &[f64],
    d: &[f64],
    alpha_bar: &BBScales,
    d0: f64,
    cfg: &LineSearchConfig,
    counters: &mut EvalCounters,
) -> Result<LineSearchResult, LineSearchError> {
    cfg.validate()?;
    if !(d0 < 0.0) {
        return Err(LineSearchError::NotDescent { d0 });
    }

    let mut fevals_used = 0usize;
    let mut gevals_used = 0usize;
    let mut best_decrease_t: Option<f64> = None;

    struct Trial {
        x: Vec<f64>,
        f: Vec<f64>,
        decrease_ok: bool,
    }
    let try_step = |t: f64,
                    fevals_used: &mut usize,
                    counters: &mut EvalCounters|
     -> Result<Trial, LineSearchError> {
        let x_t = crate::linalg::lin_comb(1.0, x, t, d);
        let f_t = evaluate(problem, &x_t, counters)?;
        *fevals_used += 1;
        let decrease_ok = sufficient_decrease(f_x, &f_t, t, d0, alpha_bar, cfg.sigma1);
        Ok(Trial { x: x_t, f: f_t, decrease_ok })
    };

    // Bracketing phase: grow t while the decrease condition holds but the
    // curvature condition fails; stop when decrease first fails.
    let bracket = {
        let mut grow_lo = 0.0_f64; // decrease condition holds here (trivially at 0)
        let mut t = cfg.t_init;
        loop {
            if fevals_used >= cfg.max_evals {
                return Err(LineSearchError::Exhausted {
                    evals: fevals_used,
                    best_t: best_decrease_t,
                });
            }
            let trial = try_step(t, &mut fevals_used, counters)?;
            if !trial.decrease_ok {
                break (grow_lo, t);
            }
            best_decrease_t = Some(t);
            let g_t = gradients(problem, &trial.x, counters)?;
            gevals_used += 1;
            let d_t = directional_value(&g_t, alpha_bar, d);
            if d_t >= cfg.sigma2 * d0 {
                return Ok(LineSearchResult {
                    t,
                    x_new: trial.x,
                    f_new: trial.f,
                    grads_new: g_t,
                    d_exit: d_t,
                    fevals_used,
                    gevals_used,
                });
            }
            grow_lo = t;
            t *= cfg.expand;
            if t > cfg.t_max {
                return Err(LineSearchError::Exhausted {
                    evals: fevals_used,
                    best_t: best_decrease_t,
                });
            }
        }
    };

    // Zoom phase: bisect [lo, hi] keeping decrease-holds at lo and
    // decrease-fails at hi.
    let (mut lo, mut hi) = bracket;
    loop {
        if fevals_used >= cfg.max_evals {
            return Err(LineSearchError::Exhausted { evals: fevals_used, best_t: best_decrease_t });
        }
        let mid = 0.5 * (lo + hi);
        let trial = try_step(mid, &mut fevals_used, counters)?;
        if !trial.decrease_ok {
            hi = mid;
            continue;
        }
        best_decrease_t = Some(best_decrease_t.map_or(mid, |b| b.max(mid)));
        let g_t = gradients(problem, &trial.x, counters)?;
        gevals_used += 1;
        let d_t = directional_value(&g_t, alpha_bar, d);
        if d_t >= cfg.sigma2 * d0 {
            return Ok(LineSearchResult {
                t: mid,
                x_new: trial.x,
                f_new: trial.f,
                grads_new: g_t,
                d_exit: d_t,
                fevals_used,
                gevals_used,
            });
        }
        lo = mid;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problem::{GradientFn, ObjectiveFn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn scalar_quadratic() -> Problem {
        Problem::quadratic(
            "half-square",
            vec![DenseMatrix::identity(1)],
            vec![vec![0.0]],
            vec![-10.0],
            vec![10.0],
        )
        .unwrap()
    }

    /// m = 1, F = x^2/2 from x = 1 along d = -1: the acceptance window is
    /// [1 - sigma2, 2 - 2*sigma1], so t_init = 1 is accepted immediately.
    #[test]
    fn unit_step_accepted_on_scalar_quadratic() {
        let p = scalar_quadratic();
        let cfg = LineSearchConfig::default();
        let mut c = EvalCounters::new();
        let res = wolfe_search(
            &p,
            &[1.0],
            &[0.5],
            &[-1.0],
            &BBScales::uniform(1, 1.0),
            -1.0,
            &cfg,
            &mut c,
        )
        .unwrap();
        assert_eq!(res.t, 1.0);
        assert_eq!(res.x_new, vec![0.0]);
        assert_eq!(res.fevals_used, 1);
        assert_eq!(res.gevals_used, 1);
        assert_eq!(c.fevals, 1);
        assert_eq!(c.gevals, 1);
        // d_exit = <x_new, d> = 0 here.
        assert_eq!(res.d_exit, 0.0);
    }

    #[test]
    fn wide_curvature_window_still_accepts_unit_step() {
        let p = scalar_quadratic();
        let cfg = LineSearchConfig { sigma2: 0.99, ..LineSearchConfig::default() };
        let mut c = EvalCounters::new();
        let res = wolfe_search(
            &p,
            &[1.0],
            &[0.5],
            &[-1.0],
            &BBScales::uniform(1, 1.0),
            -1.0,
            &cfg,
            &mut c,
        )
        .unwrap();
        assert_eq!(res.t, 1.0);
    }

    /// Halving d doubles the acceptance window in t; with t_init = 1 the
    /// search expands exactly once and lands on t = 2.
    #[test]
    fn window_rescales_with_direction_length() {
        let p = scalar_quadratic();
        let cfg = LineSearchConfig::default();
        let mut c = EvalCounters::new();
        let res = wolfe_search(
            &p,
            &[1.0],
            &[0.5],
            &[-0.5],
            &BBScales::uniform(1, 1.0),
            -0.5,
            &cfg,
            &mut c,
        )
        .unwrap();
        assert_eq!(res.t, 2.0);
        assert_eq!(res.x_new, vec![0.0]);
    }

    #[test]
    fn check_wolfe_sign_analysis() {
        let alpha = BBScales::uniform(1, 1.0);
        // No decrease at all: right side is negative, so condition 1 fails.
        let (w1, _) = check_wolfe(&[1.0], &[1.0], 0.5, -1.0, -0.5, &alpha, 1e-4, 0.1);
        assert!(!w1);
        // An unchanged slope fails the curvature condition: with D0 < 0 and
        // sigma2 < 1, sigma2*D0 lies strictly above D0.
        let (_, w2) = check_wolfe(&[1.0], &[0.4], 0.5, -1.0, -1.0, &alpha, 1e-4, 0.1);
        assert!(!w2);
        // A fully flattened slope satisfies it.
        let (_, w2) = check_wolfe(&[1.0], &[0.4], 0.5, -1.0, 0.0, &alpha, 1e-4, 0.1);
        assert!(w2);
        // Values from the closed-form quadratic trace at t = 1.
        let (w1, w2) = check_wolfe(&[0.5], &[0.0], 1.0, -1.0, 0.0, &alpha, 1e-4, 0.1);
        assert!(w1 && w2);
    }

    #[test]
    fn accepted_steps_replay_clean_on_random_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let a = rng.random_range(0.1..=50.0);
            let x0 = rng.random_range(0.5..=5.0);
            let sigma1 = rng.random_range(1e-5..=0.3);
            let sigma2 = rng.random_range(sigma1..=0.9);
            let p = Problem::quadratic(
                "rand-quad",
                vec![DenseMatrix::from_rows(1, vec![a])],
                vec![vec![0.0]],
                vec![-100.0],
                vec![100.0],
            )
            .unwrap();
            let cfg = LineSearchConfig { sigma1, sigma2, ..LineSearchConfig::default() };
            let mut c = EvalCounters::new();
            let f0 = 0.5 * a * x0 * x0;
            let g0 = a * x0;
            let d = -g0;
            let d0 = g0 * d;
            let alpha = BBScales::uniform(1, 1.0);
            let res = wolfe_search(&p, &[x0], &[f0], &[d], &alpha, d0, &cfg, &mut c)
                .expect("strongly convex search must terminate");
            let (w1, w2) = check_wolfe(
                &[f0],
                &res.f_new,
                res.t,
                d0,
                res.d_exit,
                &alpha,
                sigma1,
                sigma2,
            );
            assert!(w1 && w2);
            assert!(res.fevals_used <= cfg.max_evals);
            assert_eq!(c.fevals as usize, res.fevals_used);
            assert_eq!(c.gevals as usize, res.gevals_used);
        }
    }

    /// An over-long direction overshoots at t_init, forcing the bisection
    /// zoom: on F = x^2/2 from x = 1 along d = -4, the decrease condition
    /// fails at t = 1 and t = 1/2 and first holds at t = 1/4, where the new
    /// slope is exactly zero and the curvature condition passes too.
    #[test]
    fn overshoot_enters_zoom_and_bisects() {
        let p = scalar_quadratic();
        let cfg = LineSearchConfig::default();
        let mut c = EvalCounters::new();
        let d0 = -4.0; // <g, d> = 1 * (-4)
        let res = wolfe_search(
            &p,
            &[1.0],
            &[0.5],
            &[-4.0],
            &BBScales::uniform(1, 1.0),
            d0,
            &cfg,
            &mut c,
        )
        .unwrap();
        assert_eq!(res.t, 0.25);
        assert_eq!(res.x_new, vec![0.0]);
        assert_eq!(res.d_exit, 0.0);
        assert_eq!(res.fevals_used, 3, "t = 1, 1/2, 1/4");
        assert_eq!(res.gevals_used, 1, "gradients only at the accepted trial");
    }

    /// A linear objective keeps the slope constant, so the curvature
    /// condition is unsatisfiable and the search must exhaust its budget,
    /// reporting the best decrease-feasible step it saw.
    #[test]
    fn unbounded_descent_exhausts_budget() {
        let obj: Arc<ObjectiveFn> = Arc::new(|x: &[f64]| vec![-x[0]]);
        let grad: Arc<GradientFn> = Arc::new(|_x: &[f64]| vec![vec![-1.0]]);
        let p = Problem::new("linear", 1, vec![-1e12], vec![1e12], obj, grad).unwrap();
        let cfg = LineSearchConfig::default();
        let mut c = EvalCounters::new();
        let err = wolfe_search(
            &p,
            &[0.0],
            &[0.0],
            &[1.0],
            &BBScales::uniform(1, 1.0),
            -1.0,
            &cfg,
            &mut c,
        )
        .unwrap_err();
        match err {
            LineSearchError::Exhausted { best_t, evals } => {
                assert!(best_t.is_some());
                assert!(evals <= cfg.max_evals);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn non_descent_rejected() {
        let p = scalar_quadratic();
        let mut c = EvalCounters::new();
        let err = wolfe_search(
            &p,
            &[1.0],
            &[0.5],
            &[1.0],
            &BBScales::uniform(1, 1.0),
            1.0,
            &LineSearchConfig::default(),
            &mut c,
        )
        .unwrap_err();
        assert!(matches!(err, LineSearchError::NotDescent { .. }));
    }

    #[test]
    fn invalid_sigmas_rejected() {
        let cfg = LineSearchConfig { sigma1: 0.5, sigma2: 0.2, ..LineSearchConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
