//! Outer solve loops.
//!
//! `smbbmo_solve` follows the subspace-minimization scheme: per-objective BB
//! scales, BB direction v_k from the simplex dual, then (from the second
//! iteration on) a two-dimensional model over span{v_k, s_{k-1}} whose
//! repaired matrix feeds a second dual solve for the combination
//! d_k = mu v_k + nu s_{k-1}. `bbdmo_solve` is the plain baseline that always
//! steps along v_k. Both use the same Wolfe line search and stopping rule
//! theta(x) = -1/2 ||v(x)||^2 >= -stop_tol.

use std::time::{Duration, Instant};

use crate::audit::{audit_iteration, AuditViolation, IterationSnapshot, SubspaceAudit};
use crate::direction::{
    aggregate_y, aggregate_yv, assemble_model, bb_direction, directional_value,
    modified_cholesky, rho1, rho2, subspace_direction, BBScales, DirectionError, DirectionKind,
    FwSettings, IterateMemory,
};
use crate::linalg::{norm, norm_inf};
use crate::linesearch::{wolfe_search, LineSearchConfig, LineSearchError};
use crate::problem::{evaluate, gradients, EvalCounters, Problem};

/// Solver parameters. Defaults follow the benchmark protocol: BB scales
/// truncated to [1e-3, 1e3], Wolfe constants (1e-4, 0.1), iteration cap 500,
/// stopping tolerance 5 * sqrt(machine epsilon).
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Modified-Cholesky pivot bounds, 0 < c1 <= c2.
    pub c1: f64,
    pub c2: f64,
    pub linesearch: LineSearchConfig,
    /// Frank-Wolfe gap tolerance for both dual subproblems.
    pub fw_tol: f64,
    pub max_iters: usize,
    /// Run stops once -1/2 ||v_k||^2 >= -stop_tol.
    pub stop_tol: f64,
    /// Collect invariant violations every iteration.
    pub audit: bool,
    /// Keep a per-iteration trace in the run record.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha_min: 1e-3,
            alpha_max: 1e3,
            c1: 1e-6,
            c2: 1e6,
            linesearch: LineSearchConfig::default(),
            fw_tol: 1e-10,
            max_iters: 500,
            stop_tol: 5.0 * f64::EPSILON.sqrt(),
            audit: false,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.alpha_min && self.alpha_min <= self.alpha_max) {
            return Err("requires 0 < alpha_min <= alpha_max".into());
        }
        if !(0.0 < self.c1 && self.c1 <= self.c2) {
            return Err("requires 0 < c1 <= c2".into());
        }
        self.linesearch.validate().map_err(|e| e.to_string())?;
        if !(self.fw_tol > 0.0) {
            return Err("requires fw_tol > 0".into());
        }
        if self.max_iters == 0 {
            return Err("requires max_iters >= 1".into());
        }
        if !(self.stop_tol > 0.0) {
            return Err("requires stop_tol > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    LsFail,
    Fault,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max-iters",
            RunStatus::LsFail => "ls-fail",
            RunStatus::Fault => "fault",
        }
    }
}

/// One row of the optional per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterTrace {
    pub v_norm: f64,
    pub theta: f64,
    pub d_value: f64,
    pub step: f64,
    pub kind: DirectionKind,
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub status: RunStatus,
    /// Loop entries performed; a run that is critical at the first check
    /// reports 1.
    pub iters: usize,
    pub fevals: u64,
    pub gevals: u64,
    pub wall_time: Duration,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub trace: Option<Vec<IterTrace>>,
    pub violations: Vec<AuditViolation>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    Subspace,
    BbOnly,
}

/// Subspace-minimization BB solve.
pub fn smbbmo_solve(problem: &Problem, x0: &[f64], cfg: &SolverConfig) -> RunRecord {
    solve_inner(problem, x0, cfg, Variant::Subspace)
}

/// Plain BB descent baseline: d_k = v_k with abar = alpha at every iteration.
pub fn bbdmo_solve(problem: &Problem, x0: &[f64], cfg: &SolverConfig) -> RunRecord {
    solve_inner(problem, x0, cfg, Variant::BbOnly)
}

fn solve_inner(problem: &Problem, x0: &[f64], cfg: &SolverConfig, variant: Variant) -> RunRecord {
    cfg.validate().expect("solver config invalid");
    assert_eq!(x0.len(), problem.n(), "start point dimension mismatch");
    let started = Instant::now();
    let m = problem.m();
    let fw = FwSettings::with_tol(cfg.fw_tol, m);
    let bounds = (cfg.alpha_min, cfg.alpha_max);

    let mut counters = EvalCounters::new();
    let mut trace: Option<Vec<IterTrace>> = cfg.trace.then(Vec::new);
    let mut violations: Vec<AuditViolation> = Vec::new();

    let finish = |status: RunStatus,
                  iters: usize,
                  x: Vec<f64>,
                  f: Vec<f64>,
                  counters: EvalCounters,
                  trace: Option<Vec<IterTrace>>,
                  violations: Vec<AuditViolation>| RunRecord {
        status,
        iters,
        fevals: counters.fevals,
        gevals: counters.gevals,
        wall_time: started.elapsed(),
        x,
        f,
        trace,
        violations,
    };

    let mut x = x0.to_vec();
    let mut f = match evaluate(problem, &x, &mut counters) {
        Ok(v) => v,
        Err(_) => return finish(RunStatus::Fault, 0, x, Vec::new(), counters, trace, violations),
    };
    let mut g = match gradients(problem, &x, &mut counters) {
        Ok(v) => v,
        Err(_) => return finish(RunStatus::Fault, 0, x, f, counters, trace, violations),
    };

    // Seed memory from a deterministic companion point x^{-1} = x0 - delta*1,
    // which provides nonzero (s, y) for the first scale update.
    let delta = 1e-4 * (1.0 + norm_inf(&x));
    let x_m1: Vec<f64> = x.iter().map(|xi| xi - delta).collect();
    let g_m1 = match gradients(problem, &x_m1, &mut counters) {
        Ok(v) => v,
        Err(_) => return finish(RunStatus::Fault, 0, x, f, counters, trace, violations),
    };
    let mut mem = IterateMemory {
        s: vec![delta; problem.n()],
        y: g.iter().zip(&g_m1).map(|(gk, gp)| crate::linalg::sub(gk, gp)).collect(),
        prev_lambda: vec![1.0 / m as f64; m],
        prev_alpha_bar: BBScales::uniform(m, 1.0),
        prev_grads: g_m1,
        prev_direction: vec![1.0; problem.n()],
        prev_step: delta,
        prev_d_value: 0.0,
    };

    let mut status = RunStatus::MaxIters;
    let mut iters = 0usize;

    for k in 0..cfg.max_iters {
        iters = k + 1;

        let s_norm = norm(&mem.s);
        let alpha = BBScales::compute(&mem.s, &mem.y, s_norm * s_norm, s_norm, bounds);

        let bb = match bb_direction(&g, &alpha, fw) {
            Ok(r) => r,
            Err(_) => {
                status = RunStatus::Fault;
                break;
            }
        };
        let v_norm = norm(&bb.d);

        if bb.theta >= -cfg.stop_tol {
            status = RunStatus::Converged;
            if let Some(t) = trace.as_mut() {
                t.push(IterTrace {
                    v_norm,
                    theta: bb.theta,
                    d_value: bb.d_value,
                    step: 0.0,
                    kind: DirectionKind::BbOnly,
                });
            }
            break;
        }

        // Direction selection. The subspace route needs a usable previous
        // step; with a null s_{k-1} the 2D model is singular and the BB
        // direction is used as-is for this iteration.
        let take_subspace = variant == Variant::Subspace && k >= 1 && s_norm > 1e-14;
        let mut subspace_audit: Option<SubspaceAudit> = None;
        let (mut dir, mut alpha_bar) = if take_subspace {
            let y = aggregate_y(&g, &mem.prev_grads, &mem.prev_lambda, &mem.prev_alpha_bar);
            let y_v = match aggregate_yv(
                problem,
                &x,
                &bb.d,
                &g,
                &mem.prev_lambda,
                &mem.prev_alpha_bar,
                &mut counters,
            ) {
                Ok(v) => v,
                Err(_) => {
                    status = RunStatus::Fault;
                    break;
                }
            };
            // A broken curvature contract (rho2 <= 0 despite a Wolfe step)
            // is a fault, not a recoverable condition.
            let rho2_val = match rho2(&mem, &y) {
                Ok(v) => v,
                Err(_) => {
                    status = RunStatus::Fault;
                    break;
                }
            };
            let rho1_val = rho1(&bb.d, &y_v);
            let y_norm = norm(&y).max(f64::MIN_POSITIVE);
            let abar = BBScales::compute(&mem.s, &mem.y, rho2_val, y_norm, bounds);
            match assemble_model(&g, &abar, &bb.d, &mem.s, &y, rho1_val, rho2_val) {
                Ok(mut model) => {
                    let h_pre = model.h;
                    model.h = modified_cholesky(model.h, model.d, cfg.c1, cfg.c2);
                    match subspace_direction(&model, &bb.d, &mem.s, fw) {
                        Ok(dir) => {
                            if cfg.audit {
                                subspace_audit = Some(SubspaceAudit {
                                    a: model.a.clone(),
                                    h_pre,
                                    h_post: model.h,
                                    d_scale: model.d,
                                    rho2: rho2_val,
                                    w: [dir.mu, dir.nu],
                                });
                            }
                            (dir, abar)
                        }
                        Err(_) => {
                            status = RunStatus::Fault;
                            break;
                        }
                    }
                }
                // Degenerate model: fall back to the BB direction.
                Err(DirectionError::DegenerateSubspace { .. }) => (bb.clone(), alpha.clone()),
                Err(_) => {
                    status = RunStatus::Fault;
                    break;
                }
            }
        } else {
            (bb.clone(), alpha.clone())
        };

        let mut d0 = directional_value(&g, &alpha_bar, &dir.d);
        if d0 >= 0.0 && dir.kind == DirectionKind::Subspace {
            // Numerically non-descent subspace direction: retreat to the BB
            // direction for this iteration.
            dir = bb.clone();
            alpha_bar = alpha.clone();
            subspace_audit = None;
            d0 = directional_value(&g, &alpha_bar, &dir.d);
        }
        if d0 >= 0.0 {
            status = RunStatus::LsFail;
            break;
        }

        let ls = match wolfe_search(
            problem,
            &x,
            &f,
            &dir.d,
            &alpha_bar,
            d0,
            &cfg.linesearch,
            &mut counters,
        ) {
            Ok(r) => r,
            Err(LineSearchError::Eval(_)) => {
                status = RunStatus::Fault;
                break;
            }
            Err(_) => {
                status = RunStatus::LsFail;
                break;
            }
        };

        if cfg.audit {
            let snapshot = IterationSnapshot {
                iter: k,
                kind: dir.kind,
                alpha: alpha.clone(),
                alpha_bar: alpha_bar.clone(),
                v_norm,
                d: dir.d.clone(),
                d0_exact: d0,
                theta: dir.theta,
                d_value: dir.d_value,
                subspace: subspace_audit.take(),
                f_prev: f.clone(),
                f_new: ls.f_new.clone(),
                t: ls.t,
                d_exit: ls.d_exit,
            };
            violations.extend(audit_iteration(&snapshot, cfg));
        }

        if let Some(t) = trace.as_mut() {
            t.push(IterTrace {
                v_norm,
                theta: dir.theta,
                d_value: dir.d_value,
                step: ls.t,
                kind: dir.kind,
            });
        }

        let s_new = crate::linalg::scale(ls.t, &dir.d);
        let y_new: Vec<Vec<f64>> = ls
            .grads_new
            .iter()
            .zip(&g)
            .map(|(gn, gp)| crate::linalg::sub(gn, gp))
            .collect();
        mem = IterateMemory {
            s: s_new,
            y: y_new,
            prev_lambda: dir.lambda_bar.clone(),
            prev_alpha_bar: alpha_bar.clone(),
            prev_grads: std::mem::take(&mut g),
            prev_direction: dir.d.clone(),
            prev_step: ls.t,
            prev_d_value: ls.d_exit,
        };
        x = ls.x_new;
        f = ls.f_new;
        g = ls.grads_new;
    }

    finish(status, iters, x, f, counters, trace, violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problem::{GradientFn, ObjectiveFn};
    use crate::quadratic::{make_quadratic, QuadraticSpec};
    use crate::registry::registry_lookup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn single_identity(n: usize) -> Problem {
        Problem::quadratic(
            "single-identity",
            vec![DenseMatrix::identity(n)],
            vec![vec![0.0; n]],
            vec![-10.0; n],
            vec![10.0; n],
        )
        .unwrap()
    }

    #[test]
    fn identity_hessian_converges_in_a_few_iterations() {
        let p = single_identity(2);
        let cfg = SolverConfig::default();
        let rec = smbbmo_solve(&p, &[1.0, 1.0], &cfg);
        assert_eq!(rec.status, RunStatus::Converged);
        assert!(rec.iters <= 5, "took {} iterations", rec.iters);
        assert!(norm(&rec.x) <= (2.0 * cfg.stop_tol).sqrt());
    }

    #[test]
    fn critical_start_detected_at_first_check() {
        // A1 = A2 = I with b1 = -b2: gradients cancel at x = 0.
        let b = vec![0.7, -0.3];
        let p = Problem::quadratic(
            "critical",
            vec![DenseMatrix::identity(2), DenseMatrix::identity(2)],
            vec![b.clone(), crate::linalg::scale(-1.0, &b)],
            vec![-2.0; 2],
            vec![2.0; 2],
        )
        .unwrap();
        let rec = smbbmo_solve(&p, &[0.0, 0.0], &SolverConfig::default());
        assert_eq!(rec.status, RunStatus::Converged);
        assert_eq!(rec.iters, 1);
        assert_eq!(rec.fevals, 1);
    }

    #[test]
    fn qpa_instances_converge() {
        let p = registry_lookup("QPa").unwrap();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let x0 = crate::problem::sample_start(&p, &mut rng);
            let rec = smbbmo_solve(&p, &x0, &cfg);
            assert_eq!(rec.status, RunStatus::Converged);
            assert!(rec.iters <= 500);
        }
    }

    #[test]
    fn bbdmo_handles_moderate_conditioning_single_objective() {
        let p = Problem::quadratic(
            "diag-1-100",
            vec![DenseMatrix::from_rows(2, vec![1.0, 0.0, 0.0, 100.0])],
            vec![vec![0.0, 0.0]],
            vec![-10.0; 2],
            vec![10.0; 2],
        )
        .unwrap();
        let rec = bbdmo_solve(&p, &[5.0, 3.0], &SolverConfig::default());
        assert_eq!(rec.status, RunStatus::Converged);
        assert!(rec.iters <= 500);
    }

    #[test]
    fn runs_are_deterministic() {
        let spec = QuadraticSpec::new(10, (100.0, 100.0), 33);
        let p = make_quadratic(&spec).unwrap();
        let cfg = SolverConfig { trace: true, ..SolverConfig::default() };
        let x0: Vec<f64> = (0..10).map(|i| (i as f64) - 4.5).collect();
        let a = smbbmo_solve(&p, &x0, &cfg);
        let b = smbbmo_solve(&p, &x0, &cfg);
        assert_eq!(a.status, b.status);
        assert_eq!(a.iters, b.iters);
        assert_eq!(a.fevals, b.fevals);
        assert_eq!(a.gevals, b.gevals);
        assert_eq!(a.x, b.x);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn objectives_decrease_monotonically() {
        let p = registry_lookup("QPb").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x0 = crate::problem::sample_start(&p, &mut rng);
        // Replay the run, checking F after every accepted step.
        let cfg = SolverConfig { audit: true, ..SolverConfig::default() };
        let rec = smbbmo_solve(&p, &x0, &cfg);
        assert!(rec.violations.is_empty(), "violations: {:?}", rec.violations);
        assert_eq!(rec.status, RunStatus::Converged);
    }

    #[test]
    fn bounded_work() {
        let p = registry_lookup("QPb").unwrap();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x0 = crate::problem::sample_start(&p, &mut rng);
        for rec in [smbbmo_solve(&p, &x0, &cfg), bbdmo_solve(&p, &x0, &cfg)] {
            let max_ls = cfg.linesearch.max_evals as u64;
            let iters = rec.iters as u64;
            assert!(rec.fevals <= 1 + iters * max_ls);
            assert!(rec.gevals <= 2 + iters * (1 + max_ls));
        }
    }

    #[test]
    fn stopping_semantics_on_converged_run() {
        let p = registry_lookup("QPa").unwrap();
        let cfg = SolverConfig { trace: true, ..SolverConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0 = crate::problem::sample_start(&p, &mut rng);
        let rec = smbbmo_solve(&p, &x0, &cfg);
        assert_eq!(rec.status, RunStatus::Converged);
        let last = rec.trace.as_ref().unwrap().last().unwrap().clone();
        assert!(last.theta >= -cfg.stop_tol);
        assert!(0.5 * last.v_norm * last.v_norm <= cfg.stop_tol);
    }

    #[test]
    fn linear_objective_reports_line_search_failure() {
        let obj: Arc<ObjectiveFn> = Arc::new(|x: &[f64]| vec![-x[0]]);
        let grad: Arc<GradientFn> = Arc::new(|_x: &[f64]| vec![vec![-1.0]]);
        let p = Problem::new("linear", 1, vec![-1e12], vec![1e12], obj, grad).unwrap();
        let rec = smbbmo_solve(&p, &[0.0], &SolverConfig::default());
        assert_eq!(rec.status, RunStatus::LsFail);
    }

    #[test]
    fn nan_gradient_reports_fault() {
        let obj: Arc<ObjectiveFn> = Arc::new(|x: &[f64]| vec![x[0] * x[0]]);
        let grad: Arc<GradientFn> = Arc::new(|_x: &[f64]| vec![vec![f64::NAN]]);
        let p = Problem::new("nan-grad", 1, vec![-1.0], vec![1.0], obj, grad).unwrap();
        let rec = smbbmo_solve(&p, &[0.5], &SolverConfig::default());
        assert_eq!(rec.status, RunStatus::Fault);
    }

    #[test]
    fn smbbmo_beats_baseline_on_ill_conditioned_instance() {
        let spec = QuadraticSpec::new(50, (1e4, 1e4), 7);
        let p = make_quadratic(&spec).unwrap();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut sm_total = 0usize;
        let mut bb_total = 0usize;
        for _ in 0..5 {
            let x0 = crate::problem::sample_start(&p, &mut rng);
            sm_total += smbbmo_solve(&p, &x0, &cfg).iters;
            bb_total += bbdmo_solve(&p, &x0, &cfg).iters;
        }
        assert!(
            sm_total < bb_total,
            "subspace route should need fewer iterations: {sm_total} vs {bb_total}"
        );
    }

    #[test]
    fn audited_healthy_run_has_no_violations() {
        let p = registry_lookup("QPa").unwrap();
        let cfg = SolverConfig { audit: true, ..SolverConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let x0 = crate::problem::sample_start(&p, &mut rng);
            for rec in [smbbmo_solve(&p, &x0, &cfg), bbdmo_solve(&p, &x0, &cfg)] {
                assert!(rec.violations.is_empty(), "violations: {:?}", rec.violations);
            }
        }
    }

    #[test]
    fn rng_assisted_two_objective_runs_stay_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let cfg = SolverConfig { audit: true, ..SolverConfig::default() };
        for seed in 0..4 {
            let spec = QuadraticSpec::new(8, (10.0_f64.powi(seed + 1), 10.0), seed as u64);
            let p = make_quadratic(&spec).unwrap();
            let x0 = crate::problem::sample_start(&p, &mut rng);
            let rec = smbbmo_solve(&p, &x0, &cfg);
            assert!(rec.violations.is_empty(), "violations: {:?}", rec.violations);
            assert_eq!(rec.status, RunStatus::Converged);
        }
    }
}
