use crate::error::{CliError, CliResult};
use dods_core::invariant_solutions::InvariantSolution;
use dods_core::solver::SampleRow;
use serde::Serialize;
use std::path::Path;

fn prepare(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

/// Solution rows under the header `x,y,ydot,segment_index`.
pub fn write_rows(path: &Path, rows: &[SampleRow]) -> CliResult<()> {
    prepare(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    if rows.is_empty() {
        w.write_record(["x", "y", "ydot", "segment_index"]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    prepare(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct CurveRow {
    solution: usize,
    t: f64,
    x: f64,
    y: f64,
    ydot: f64,
    x_minus: f64,
    y_minus: f64,
}

/// `n` points per solution on the interior of its admissible interval.
pub fn write_invariant_samples(path: &Path, sols: &[InvariantSolution], n: usize) -> CliResult<()> {
    prepare(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut written = 0;
    for (i, s) in sols.iter().enumerate() {
        let (lo, hi) = (s.domain.0.max(-1e6), s.domain.1.min(1e6));
        for k in 0..n {
            let t = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
            let Ok(p) = s.point(t) else { continue };
            let row = CurveRow { solution: i, t, x: p.x, y: p.y, ydot: p.ydot, x_minus: p.x_minus, y_minus: p.y_minus };
            w.serialize(row).map_err(|e| csv_err(path, e))?;
            written += 1;
        }
    }
    if written == 0 {
        w.write_record(["solution", "t", "x", "y", "ydot", "x_minus", "y_minus"]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
