//! Benchmark harness: batches of seeded solver runs per problem per
//! algorithm, with CSV statistics and value-space point clouds.
//!
//! The protocol per (problem, run index): draw one start point from a seed
//! derived off the master seed, then run every requested algorithm from that
//! same point. Averages include non-converged runs at their capped iteration
//! count.

pub mod cli;
pub mod config;
pub mod emit;
pub mod seeds;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use mop::problem::{sample_start, Problem};
use mop::quadratic::{make_quadratic, QuadraticSpec};
use mop::registry::registry_lookup;
use mop::solver::{bbdmo_solve, smbbmo_solve, RunRecord, RunStatus, SolverConfig};

pub use emit::{emit_csv, emit_front, fmt_g6};
pub use seeds::derive_seed;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan needs at least one problem")]
    NoProblems,
    #[error("plan needs at least one algorithm")]
    NoAlgorithms,
    #[error("plan needs runs >= 1")]
    NoRuns,
    #[error(transparent)]
    UnknownProblem(#[from] mop::registry::RegistryError),
    #[error("bad quadratic spec {spec:?}: {reason}")]
    BadQuadraticSpec { spec: String, reason: String },
    #[error("{name} has n = {n}; pass --large to include instances with n >= 1000")]
    LargeProblemGated { name: String, n: usize },
    #[error("solver config invalid: {0}")]
    Solver(String),
}

/// A problem reference in a plan: a registry name or an ad-hoc quadratic
/// written `qp:n,k1,k2`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemChoice {
    Registry(String),
    Quadratic { n: usize, kappa1: f64, kappa2: f64 },
}

impl ProblemChoice {
    pub fn parse(text: &str) -> Result<Self, PlanError> {
        if let Some(rest) = text.strip_prefix("qp:") {
            let bad = |reason: &str| PlanError::BadQuadraticSpec {
                spec: text.to_string(),
                reason: reason.to_string(),
            };
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("expected qp:n,k1,k2"));
            }
            let n: usize = parts[0].trim().parse().map_err(|_| bad("n must be an integer"))?;
            let kappa1: f64 = parts[1].trim().parse().map_err(|_| bad("k1 must be a number"))?;
            let kappa2: f64 = parts[2].trim().parse().map_err(|_| bad("k2 must be a number"))?;
            Ok(ProblemChoice::Quadratic { n, kappa1, kappa2 })
        } else {
            Ok(ProblemChoice::Registry(text.to_string()))
        }
    }

    /// The label used in CSV columns and seed derivation.
    pub fn label(&self) -> String {
        match self {
            ProblemChoice::Registry(name) => name.clone(),
            ProblemChoice::Quadratic { n, kappa1, kappa2 } => {
                format!("qp:{n},{kappa1},{kappa2}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Smbbmo,
    Bbdmo,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Smbbmo => "smbbmo",
            Algorithm::Bbdmo => "bbdmo",
        }
    }

    fn solve(&self, problem: &Problem, x0: &[f64], cfg: &SolverConfig) -> RunRecord {
        match self {
            Algorithm::Smbbmo => smbbmo_solve(problem, x0, cfg),
            Algorithm::Bbdmo => bbdmo_solve(problem, x0, cfg),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub problems: Vec<ProblemChoice>,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub master_seed: u64,
    /// Same start point for every algorithm of a run (the protocol default).
    pub shared_starts: bool,
    pub solver: SolverConfig,
    /// Allow instances with n >= 1000 (they dominate wall time).
    pub large: bool,
}

impl BenchmarkPlan {
    pub fn new(problems: Vec<ProblemChoice>, algorithms: Vec<Algorithm>) -> Self {
        Self {
            problems,
            algorithms,
            runs: 200,
            master_seed: 0,
            shared_starts: true,
            solver: SolverConfig::default(),
            large: false,
        }
    }
}

/// One solve outcome within a plan.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub run: usize,
    /// Seed the start point was drawn from.
    pub seed: u64,
    /// Start point (kept in memory for contract checks, not emitted).
    pub x0: Vec<f64>,
    pub record: RunRecord,
}

/// Per-(problem, algorithm) averages over all runs, non-converged included.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub conv_rate: f64,
    pub mean_iters: f64,
    pub mean_fevals: f64,
    pub mean_gevals: f64,
    pub mean_time_ms: f64,
}

fn instantiate(choice: &ProblemChoice, plan: &BenchmarkPlan) -> Result<Problem, PlanError> {
    let problem = match choice {
        ProblemChoice::Registry(name) => registry_lookup(name)?,
        ProblemChoice::Quadratic { n, kappa1, kappa2 } => {
            let seed = derive_seed(plan.master_seed, &format!("instance:{}", choice.label()), 0);
            let spec = QuadraticSpec::new(*n, (*kappa1, *kappa2), seed);
            make_quadratic(&spec).map_err(|e| PlanError::BadQuadraticSpec {
                spec: choice.label(),
                reason: e.to_string(),
            })?
        }
    };
    if problem.n() >= 1000 && !plan.large {
        return Err(PlanError::LargeProblemGated {
            name: choice.label(),
            n: problem.n(),
        });
    }
    Ok(problem)
}

/// Executes a plan: all (problem, run, algorithm) solves, order-stable
/// results, per-(problem, algorithm) summaries. Fully reproducible from the
/// master seed; individual run faults are recorded, not fatal.
pub fn run_plan(plan: &BenchmarkPlan) -> Result<(Vec<RunRow>, Vec<SummaryRow>), PlanError> {
    if plan.problems.is_empty() {
        return Err(PlanError::NoProblems);
    }
    if plan.algorithms.is_empty() {
        return Err(PlanError::NoAlgorithms);
    }
    if plan.runs == 0 {
        return Err(PlanError::NoRuns);
    }
    plan.solver.validate().map_err(PlanError::Solver)?;

    // Problem instantiation happens once, outside the timed solves.
    let mut problems = Vec::with_capacity(plan.problems.len());
    for choice in &plan.problems {
        problems.push((choice.label(), instantiate(choice, plan)?));
    }

    let jobs: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..plan.runs).map(move |r| (p, r)))
        .collect();

    let mut rows: Vec<RunRow> = jobs
        .par_iter()
        .flat_map_iter(|&(p_idx, run)| {
            let (label, problem) = &problems[p_idx];
            let mut out = Vec::with_capacity(plan.algorithms.len());
            if plan.shared_starts {
                let seed = derive_seed(plan.master_seed, label, run as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x0 = sample_start(problem, &mut rng);
                for algo in &plan.algorithms {
                    let record = algo.solve(problem, &x0, &plan.solver);
                    out.push(RunRow {
                        problem: label.clone(),
                        algorithm: *algo,
                        run,
                        seed,
                        x0: x0.clone(),
                        record,
                    });
                }
            } else {
                for algo in &plan.algorithms {
                    let tag = format!("{label}:{}", algo.as_str());
                    let seed = derive_seed(plan.master_seed, &tag, run as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let x0 = sample_start(problem, &mut rng);
                    let record = algo.solve(problem, &x0, &plan.solver);
                    out.push(RunRow {
                        problem: label.clone(),
                        algorithm: *algo,
                        run,
                        seed,
                        x0,
                        record,
                    });
                }
            }
            out
        })
        .collect();

    rows.sort_by(|a, b| {
        (a.problem.as_str(), a.algorithm.as_str(), a.run)
            .cmp(&(b.problem.as_str(), b.algorithm.as_str(), b.run))
    });

    let summaries = summarize(&rows);
    Ok((rows, summaries))
}

/// Aggregates sorted rows into per-(problem, algorithm) means.
pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        let need_new = out
            .last()
            .map(|s| s.problem != row.problem || s.algorithm != row.algorithm)
            .unwrap_or(true);
        if need_new {
            out.push(SummaryRow {
                problem: row.problem.clone(),
                algorithm: row.algorithm,
                runs: 0,
                conv_rate: 0.0,
                mean_iters: 0.0,
                mean_fevals: 0.0,
                mean_gevals: 0.0,
                mean_time_ms: 0.0,
            });
        }
        let s = out.last_mut().unwrap();
        s.runs += 1;
        if row.record.status == RunStatus::Converged {
            s.conv_rate += 1.0;
        }
        s.mean_iters += row.record.iters as f64;
        s.mean_fevals += row.record.fevals as f64;
        s.mean_gevals += row.record.gevals as f64;
        s.mean_time_ms += row.record.wall_time.as_secs_f64() * 1e3;
    }
    for s in &mut out {
        let n = s.runs as f64;
        s.conv_rate /= n;
        s.mean_iters /= n;
        s.mean_fevals /= n;
        s.mean_gevals /= n;
        s.mean_time_ms /= n;
    }
    out
}
