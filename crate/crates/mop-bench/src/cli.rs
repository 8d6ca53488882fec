//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage/plan errors, 2 on I/O errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{apply_overrides, parse_config_file};
use crate::{emit_csv, emit_front, fmt_g6, run_plan, Algorithm, BenchmarkPlan, ProblemChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoChoice {
    Smbbmo,
    Bbdmo,
    All,
}

impl AlgoChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoChoice::Smbbmo => vec![Algorithm::Smbbmo],
            AlgoChoice::Bbdmo => vec![Algorithm::Bbdmo],
            AlgoChoice::All => vec![Algorithm::Smbbmo, Algorithm::Bbdmo],
        }
    }
}

/// Seeded benchmark batches for the multiobjective BB solvers.
#[derive(Debug, Parser)]
#[command(name = "mop-bench", version, disable_version_flag = true)]
struct Cli {
    /// Problem to run: a registry name (QPa..QPh, JOS1, Imbalanced) or an
    /// ad-hoc quadratic `qp:n,k1,k2`. Repeatable.
    #[arg(long = "problem", value_name = "NAME|qp:n,k1,k2", required = true)]
    problem: Vec<String>,

    /// Algorithm(s) to run.
    #[arg(long, value_enum, default_value_t = AlgoChoice::All)]
    algo: AlgoChoice,

    /// Runs per problem (each with its own seeded start point).
    #[arg(long, default_value_t = 200)]
    runs: usize,

    /// Master seed; everything in the plan derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Override the solver iteration cap.
    #[arg(long = "max-iters", value_name = "N")]
    max_iters: Option<usize>,

    /// Output directory for runs.csv / summary.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Also write per-(problem, algorithm) value-space point clouds.
    #[arg(long = "emit-front")]
    emit_front: bool,

    /// Enable per-iteration invariant auditing (violations are counted).
    #[arg(long)]
    audit: bool,

    /// Solver config file with `key = value` lines overriding defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Include instances with n >= 1000.
    #[arg(long)]
    large: bool,

    /// Zero the timing columns so output files are byte-reproducible.
    #[arg(long = "no-timing")]
    no_timing: bool,
}

/// Runs the CLI against explicit arguments; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems (including `--help`) render clap's message;
            // help/version requests still count as plan-level exits.
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };

    let mut plan = BenchmarkPlan::new(Vec::new(), cli.algo.algorithms());
    for text in &cli.problem {
        match ProblemChoice::parse(text) {
            Ok(choice) => plan.problems.push(choice),
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        }
    }
    plan.runs = cli.runs;
    plan.master_seed = cli.seed;
    plan.large = cli.large;

    if let Some(path) = &cli.config {
        let pairs = match parse_config_file(path) {
            Ok(pairs) => pairs,
            Err(crate::config::ConfigError::Io(err)) => {
                eprintln!("error: cannot read {}: {err}", path.display());
                return 2;
            }
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        };
        if let Err(err) = apply_overrides(&mut plan.solver, &pairs) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    // Explicit flags win over the config file.
    if let Some(n) = cli.max_iters {
        plan.solver.max_iters = n;
    }
    if cli.audit {
        plan.solver.audit = true;
    }

    let (rows, summaries) = match run_plan(&plan) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };

    if let Err(err) = emit_csv(&rows, &summaries, &cli.out, !cli.no_timing) {
        eprintln!("error: writing CSVs to {}: {err}", cli.out.display());
        return 2;
    }
    if cli.emit_front {
        if let Err(err) = emit_front(&rows, &cli.out) {
            eprintln!("error: writing value-space clouds to {}: {err}", cli.out.display());
            return 2;
        }
    }

    let audited: usize = rows.iter().map(|r| r.record.violations.len()).sum();
    for s in &summaries {
        println!(
            "{} {}: runs={} conv_rate={} mean_iters={} mean_fevals={} mean_gevals={} mean_time_ms={}",
            s.problem,
            s.algorithm.as_str(),
            s.runs,
            fmt_g6(s.conv_rate),
            fmt_g6(s.mean_iters),
            fmt_g6(s.mean_fevals),
            fmt_g6(s.mean_gevals),
            fmt_g6(s.mean_time_ms),
        );
    }
    if plan.solver.audit {
        println!("audit violations: {audited}");
    }
    println!("wrote {}", cli.out.join("runs.csv").display());
    println!("wrote {}", cli.out.join("summary.csv").display());
    0
}
