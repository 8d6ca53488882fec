//! Multiobjective descent solvers built around Barzilai-Borwein scaling.
//!
//! The library provides:
//!
//! - a [`problem::Problem`] abstraction with evaluation counters, a registry
//!   of named test problems and a seeded ill-conditioned quadratic generator;
//! - a simplex-dual solver ([`qp`]) for the min-max direction subproblems,
//!   using Frank-Wolfe with exact segment line search plus a closed-form
//!   two-objective oracle;
//! - the direction machinery ([`direction`]): per-objective BB scales, the BB
//!   descent direction, the two-dimensional subspace model with its scaled
//!   modified Cholesky repair;
//! - a multiobjective Wolfe line search ([`linesearch`]);
//! - two outer loops ([`solver`]): `smbbmo_solve` (subspace-accelerated) and
//!   `bbdmo_solve` (plain BB baseline), with optional per-iteration invariant
//!   auditing ([`audit`]).

// `!(x > 0)`-style guards are load-bearing: they must route NaN into the
// rejection branch, which `x <= 0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Line-search entry points carry the full set of raw quantities on purpose.
#![allow(clippy::too_many_arguments)]

pub mod audit;
pub mod direction;
pub mod linalg;
pub mod linesearch;
pub mod problem;
pub mod qp;
pub mod quadratic;
pub mod registry;
pub mod solver;

pub use problem::{evaluate, gradients, sample_start, EvalCounters, EvalFault, Problem};
pub use quadratic::{make_quadratic, make_quadratic_parts, QuadraticSpec};
pub use registry::{registry_lookup, registry_names, RegistryError};
pub use solver::{bbdmo_solve, smbbmo_solve, RunRecord, RunStatus, SolverConfig};
