//! Named test problems.
//!
//! The quadratic family QPa..QPh follows the benchmark table (dimension,
//! condition numbers, sampling box `n*[-1,1]^n`); each name maps to one fixed
//! instance whose generator seed is derived from the name, so repeated
//! lookups return the same matrices. Two self-contained convex pairs (JOS1,
//! Imbalanced) round out the registry.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::dot;
use crate::problem::{GradientFn, ObjectiveFn, Problem};
use crate::quadratic::{make_quadratic_parts, quadratic_problem, QuadraticSpec};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown problem {name:?}; available: {}", available.join(", "))]
    UnknownName { name: String, available: Vec<&'static str> },
}

struct QpRow {
    name: &'static str,
    n: usize,
    kappa: f64,
}

const QP_TABLE: &[QpRow] = &[
    QpRow { name: "QPa", n: 10, kappa: 1e1 },
    QpRow { name: "QPb", n: 10, kappa: 1e2 },
    QpRow { name: "QPc", n: 100, kappa: 1e2 },
    QpRow { name: "QPd", n: 100, kappa: 1e3 },
    QpRow { name: "QPe", n: 500, kappa: 1e3 },
    QpRow { name: "QPf", n: 500, kappa: 1e4 },
    QpRow { name: "QPg", n: 1000, kappa: 1e4 },
    QpRow { name: "QPh", n: 1000, kappa: 1e5 },
];

/// All registered names, sorted.
pub fn registry_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = QP_TABLE.iter().map(|r| r.name).collect();
    names.push("JOS1");
    names.push("Imbalanced");
    names.sort_unstable();
    names
}

/// FNV-1a over the name; gives each registry instance a fixed,
/// platform-independent generator seed.
fn name_seed(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Looks up a problem by registered name.
pub fn registry_lookup(name: &str) -> Result<Problem, RegistryError> {
    if let Some(row) = QP_TABLE.iter().find(|r| r.name == name) {
        let spec = QuadraticSpec::new(row.n, (row.kappa, row.kappa), name_seed(row.name));
        let parts = make_quadratic_parts(&spec).expect("table specs are valid");
        return Ok(quadratic_problem(row.name, parts, row.n as f64));
    }
    match name {
        "JOS1" => Ok(jos1_pair()),
        "Imbalanced" => Ok(imbalanced_pair()),
        _ => Err(RegistryError::UnknownName {
            name: name.to_string(),
            available: registry_names(),
        }),
    }
}

/// Convex reference pair F_1 = 1/2 ||x||^2, F_2 = 1/2 ||x - 2*1||^2 (n = 2).
fn jos1_pair() -> Problem {
    shifted_scaled_pair("JOS1", 1.0)
}

/// Same pair with the second objective scaled by 1e3, so the two objectives
/// pull at very different magnitudes.
fn imbalanced_pair() -> Problem {
    shifted_scaled_pair("Imbalanced", 1e3)
}

fn shifted_scaled_pair(name: &str, second_scale: f64) -> Problem {
    let n = 2;
    let shift = vec![2.0; n];
    let shift_g = shift.clone();
    let objectives: Arc<ObjectiveFn> = Arc::new(move |x: &[f64]| {
        let f1 = 0.5 * dot(x, x);
        let f2 = 0.5
            * second_scale
            * x.iter().zip(&shift).map(|(xi, si)| (xi - si) * (xi - si)).sum::<f64>();
        vec![f1, f2]
    });
    let gradients: Arc<GradientFn> = Arc::new(move |x: &[f64]| {
        let g1 = x.to_vec();
        let g2 = x.iter().zip(&shift_g).map(|(xi, si)| second_scale * (xi - si)).collect();
        vec![g1, g2]
    });
    Problem::new(name, 2, vec![-2.0; n], vec![2.0; n], objectives, gradients)
        .expect("static bounds are valid")
}

/// Exposes the quadratic table spec behind a QP name (used by the benchmark
/// harness to gate the large instances).
pub fn qp_table_entry(name: &str) -> Option<(usize, f64)> {
    QP_TABLE.iter().find(|r| r.name == name).map(|r| (r.n, r.kappa))
}
