//! CSV emission with stable ordering and fixed number formatting, so
//! re-emitting the same records yields byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::{RunRow, SummaryRow};

/// Renders a float with 6 significant digits, plain notation for moderate
/// exponents and scientific otherwise (the shape of C's %.6g).
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let prec = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", prec, x))
    } else {
        format!("{:.5e}", x)
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Writes runs.csv and summary.csv under `dir`. With `include_timing` off,
/// the timing columns are zeroed so output files are reproducible.
pub fn emit_csv(
    rows: &[RunRow],
    summaries: &[SummaryRow],
    dir: &Path,
    include_timing: bool,
) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;

    let mut sorted: Vec<&RunRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.problem.as_str(), a.algorithm.as_str(), a.run)
            .cmp(&(b.problem.as_str(), b.algorithm.as_str(), b.run))
    });
    let runs_path = dir.join("runs.csv");
    let mut out = String::from("problem,algo,run,seed,status,iters,fevals,gevals,time_ms\n");
    for row in &sorted {
        let time_ms = if include_timing {
            row.record.wall_time.as_secs_f64() * 1e3
        } else {
            0.0
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.problem,
            row.algorithm.as_str(),
            row.run,
            row.seed,
            row.record.status.as_str(),
            row.record.iters,
            row.record.fevals,
            row.record.gevals,
            fmt_g6(time_ms),
        ));
    }
    fs::File::create(&runs_path)?.write_all(out.as_bytes())?;

    let mut sorted_sum: Vec<&SummaryRow> = summaries.iter().collect();
    sorted_sum.sort_by(|a, b| {
        (a.problem.as_str(), a.algorithm.as_str()).cmp(&(b.problem.as_str(), b.algorithm.as_str()))
    });
    let summary_path = dir.join("summary.csv");
    let mut out =
        String::from("problem,algo,runs,conv_rate,mean_iters,mean_fevals,mean_gevals,mean_time_ms\n");
    for s in &sorted_sum {
        let mean_time = if include_timing { s.mean_time_ms } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.problem,
            s.algorithm.as_str(),
            s.runs,
            fmt_g6(s.conv_rate),
            fmt_g6(s.mean_iters),
            fmt_g6(s.mean_fevals),
            fmt_g6(s.mean_gevals),
            fmt_g6(mean_time),
        ));
    }
    fs::File::create(&summary_path)?.write_all(out.as_bytes())?;

    Ok((runs_path, summary_path))
}

/// Writes one `front_<problem>_<algo>.csv` per (problem, algorithm) pair,
/// holding the final objective values of every run: the raw data behind
/// value-space scatter plots. Only defined for bi-objective problems.
pub fn emit_front(rows: &[RunRow], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut sorted: Vec<&RunRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.problem.as_str(), a.algorithm.as_str(), a.run)
            .cmp(&(b.problem.as_str(), b.algorithm.as_str(), b.run))
    });
    let mut paths = Vec::new();
    let mut current: Option<(String, String, String)> = None; // (problem, algo, contents)
    let flush = |cur: &mut Option<(String, String, String)>,
                 paths: &mut Vec<PathBuf>|
     -> io::Result<()> {
        if let Some((problem, algo, contents)) = cur.take() {
            let path = dir.join(format!("front_{}_{}.csv", sanitize(&problem), algo));
            fs::File::create(&path)?.write_all(contents.as_bytes())?;
            paths.push(path);
        }
        Ok(())
    };
    for row in &sorted {
        if row.record.f.len() != 2 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!(
                    "value-space export needs bi-objective problems; {} has {} objectives",
                    row.problem,
                    row.record.f.len()
                ),
            ));
        }
        let key_changed = current
            .as_ref()
            .map(|(p, a, _)| p != &row.problem || a != row.algorithm.as_str())
            .unwrap_or(true);
        if key_changed {
            flush(&mut current, &mut paths)?;
            current = Some((
                row.problem.clone(),
                row.algorithm.as_str().to_string(),
                String::from("f1,f2\n"),
            ));
        }
        if let Some((_, _, contents)) = current.as_mut() {
            contents.push_str(&format!(
                "{},{}\n",
                fmt_g6(row.record.f[0]),
                fmt_g6(row.record.f[1])
            ));
        }
    }
    flush(&mut current, &mut paths)?;
    Ok(paths)
}
