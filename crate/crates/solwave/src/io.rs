//! Plain-text persistence: profile, trace, and sweep tables.
//!
//! All files are comma-separated with LF line endings and `.` decimals.
//! Floating-point values are written with 17 significant digits, which
//! round-trips `f64` exactly:
//!
//! * profile: header `x,psi`, one row per grid point;
//! * trace: header `n,P,Q,E_r,E_s,E_a` (`Q` empty for single-power runs);
//! * sweep: header `param,amplitude,status,iterations` (amplitude empty for
//!   points that did not converge).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::analysis::SweepResult;
use crate::solver::IterationRecord;
use crate::spectral::{Field, Grid, GridError};

/// Relative tolerance for the uniform-spacing check when reconstructing a
/// grid from a profile's `x` column.
const SPACING_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("malformed profile CSV: {0}")]
    MalformedCsv(String),
    #[error("x column is not a uniform symmetric grid: {0}")]
    NonUniformGrid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a profile as `x,psi` rows at full precision.
pub fn write_profile(path: &Path, field: &Field) -> Result<(), ProfileError> {
    let mut out = String::with_capacity(40 * field.values().len() + 8);
    out.push_str("x,psi\n");
    for (&x, &v) in field.grid().points().iter().zip(field.values()) {
        let _ = writeln!(out, "{},{}", fmt_float(x), fmt_float(v));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a profile written by [`write_profile`], reconstructing its grid
/// from the `x` column. The column must be uniformly spaced (relative
/// tolerance `1e-9`), have an even number of rows, and span a symmetric
/// interval `[-L, L)`.
pub fn read_profile(path: &Path) -> Result<Field, ProfileError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "x,psi" => {}
        Some(other) => {
            return Err(ProfileError::MalformedCsv(format!(
                "expected header 'x,psi', found '{other}'"
            )))
        }
        None => return Err(ProfileError::MalformedCsv("empty file".into())),
    }

    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let (xs_str, vs_str) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(ProfileError::MalformedCsv(format!(
                    "row {} has fewer than 2 columns",
                    i + 2
                )))
            }
        };
        let parse = |s: &str| -> Result<f64, ProfileError> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| ProfileError::MalformedCsv(format!("row {}: {e}", i + 2)))
        };
        xs.push(parse(xs_str)?);
        vs.push(parse(vs_str)?);
    }

    if xs.len() < 4 {
        return Err(ProfileError::MalformedCsv(format!(
            "need at least 4 rows, found {}",
            xs.len()
        )));
    }
    if xs.len() % 2 != 0 {
        return Err(ProfileError::NonUniformGrid(format!(
            "odd number of samples ({})",
            xs.len()
        )));
    }

    let h = xs[1] - xs[0];
    if h <= 0.0 || h.is_nan() {
        return Err(ProfileError::NonUniformGrid(
            "x column is not increasing".into(),
        ));
    }
    for (i, w) in xs.windows(2).enumerate() {
        let d = w[1] - w[0];
        if (d - h).abs() > SPACING_TOL * h.abs() {
            return Err(ProfileError::NonUniformGrid(format!(
                "spacing jumps from {h} to {d} at row {}",
                i + 3
            )));
        }
    }

    let n = xs.len() / 2;
    let half_length = n as f64 * h;
    if (xs[0] + half_length).abs() > SPACING_TOL * half_length {
        return Err(ProfileError::NonUniformGrid(format!(
            "x column starts at {} instead of -{half_length}",
            xs[0]
        )));
    }

    let grid = Arc::new(Grid::new(half_length, h)?);
    Ok(Field::new(grid, vs)?)
}

/// Writes the per-iteration diagnostics table.
pub fn write_trace(path: &Path, trace: &[IterationRecord]) -> Result<(), ProfileError> {
    let mut out = String::with_capacity(110 * trace.len() + 20);
    out.push_str("n,P,Q,E_r,E_s,E_a\n");
    for rec in trace {
        let q = rec.q.map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            rec.n,
            fmt_float(rec.p),
            q,
            fmt_float(rec.e_r),
            fmt_float(rec.e_s),
            fmt_float(rec.e_a),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a sweep table (`param,amplitude,status,iterations`).
pub fn write_sweep(path: &Path, sweep: &SweepResult) -> Result<(), ProfileError> {
    let mut out = String::from("param,amplitude,status,iterations\n");
    for i in 0..sweep.parameters.len() {
        let amp = sweep.amplitudes[i].map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_float(sweep.parameters[i]),
            amp,
            sweep.statuses[i],
            sweep.iterations[i],
        );
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("solwave-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let grid = Arc::new(Grid::new(3.0, 0.25).unwrap());
        let f = Field::sample(Arc::clone(&grid), |x| (-x * x).exp() * 1.2345678901234567)
            .unwrap();
        let path = tmp("roundtrip.csv");
        write_profile(&path, &f).unwrap();
        let back = read_profile(&path).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().points(), f.grid().points());
    }

    #[test]
    fn empty_file_is_malformed() {
        let path = tmp("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_profile(&path),
            Err(ProfileError::MalformedCsv(_))
        ));
    }

    #[test]
    fn shuffled_rows_are_rejected() {
        let grid = Arc::new(Grid::new(2.0, 0.25).unwrap());
        let f = Field::sample(Arc::clone(&grid), |x| x).unwrap();
        let path = tmp("shuffled.csv");
        write_profile(&path, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(3, 7);
        std::fs::write(&path, lines.join("\n")).unwrap();
        assert!(matches!(
            read_profile(&path),
            Err(ProfileError::NonUniformGrid(_))
        ));
    }

    #[test]
    fn missing_column_is_malformed() {
        let path = tmp("onecol.csv");
        std::fs::write(&path, "x,psi\n1.0\n2.0\n3.0\n4.0\n").unwrap();
        assert!(matches!(
            read_profile(&path),
            Err(ProfileError::MalformedCsv(_))
        ));
    }

    #[test]
    fn asymmetric_grid_is_rejected() {
        let path = tmp("asym.csv");
        let mut text = String::from("x,psi\n");
        for j in 0..8 {
            let _ = writeln!(text, "{},1.0", j as f64 * 0.5);
        }
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_profile(&path),
            Err(ProfileError::NonUniformGrid(_))
        ));
    }

    #[test]
    fn trace_header_and_empty_q() {
        let path = tmp("trace.csv");
        let trace = vec![IterationRecord {
            n: 1,
            p: 1.5,
            q: None,
            e_r: 0.5,
            e_s: 0.25,
            e_a: 0.125,
        }];
        write_trace(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,P,Q,E_r,E_s,E_a"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,1.5"));
        assert_eq!(row.split(',').nth(2), Some(""));
    }
}
