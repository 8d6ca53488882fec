//! Line-oriented `key = value` solver configuration files.
//!
//! `#` starts a comment; blank lines are ignored. Keys mirror the solver
//! configuration fields.

use std::path::Path;

use mop::solver::SolverConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: cannot parse value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
}

/// Parses a config file into key/value pairs.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed { line, text: raw.to_string() });
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Applies parsed pairs onto a solver config; unknown keys are errors.
pub fn apply_overrides(
    cfg: &mut SolverConfig,
    pairs: &[(String, String)],
) -> Result<(), ConfigError> {
    for (line, (key, value)) in pairs.iter().enumerate() {
        let line = line + 1;
        let bad = || ConfigError::BadValue {
            line,
            key: key.clone(),
            value: value.clone(),
        };
        match key.as_str() {
            "alpha_min" => cfg.alpha_min = value.parse().map_err(|_| bad())?,
            "alpha_max" => cfg.alpha_max = value.parse().map_err(|_| bad())?,
            "c1" => cfg.c1 = value.parse().map_err(|_| bad())?,
            "c2" => cfg.c2 = value.parse().map_err(|_| bad())?,
            "sigma1" => cfg.linesearch.sigma1 = value.parse().map_err(|_| bad())?,
            "sigma2" => cfg.linesearch.sigma2 = value.parse().map_err(|_| bad())?,
            "t_init" => cfg.linesearch.t_init = value.parse().map_err(|_| bad())?,
            "expand" => cfg.linesearch.expand = value.parse().map_err(|_| bad())?,
            "max_evals" => cfg.linesearch.max_evals = value.parse().map_err(|_| bad())?,
            "t_max" => cfg.linesearch.t_max = value.parse().map_err(|_| bad())?,
            "fw_tol" => cfg.fw_tol = value.parse().map_err(|_| bad())?,
            "max_iters" => cfg.max_iters = value.parse().map_err(|_| bad())?,
            "stop_tol" => cfg.stop_tol = value.parse().map_err(|_| bad())?,
            "audit" => cfg.audit = value.parse().map_err(|_| bad())?,
            "trace" => cfg.trace = value.parse().map_err(|_| bad())?,
            _ => {
                return Err(ConfigError::UnknownKey { line, key: key.clone() });
            }
        }
    }
    Ok(())
}
