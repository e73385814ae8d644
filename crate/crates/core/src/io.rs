//! Text formats: flat `key = value` records, trace and field CSV files, and
//! the `meta.txt` sidecar of a front bundle.
//!
//! CSV numbers carry 17 significant digits; key-value records use the
//! shortest representation that round-trips. Lines end in LF.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::SpeedTrace;
use crate::grid::{Field, TraceProfile};
use crate::solver::FrontSolution;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped
/// and repeated keys are rejected. Order is preserved.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Parse(format!("line {}: duplicate key `{k}`", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn format_kv(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

/// Seventeen significant digits.
pub fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn read_rows(path: &Path, header: &str) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Parse(format!("{} is empty", path.display())))?;
    if first.trim() != header {
        return Err(Error::Parse(format!("{}: expected header `{header}`, got `{first}`", path.display())));
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let row = l.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
            if row.len() != width {
                return Err(Error::Parse(format!("{} line {}: expected {width} columns", path.display(), n + 2)));
            }
            Ok(row)
        })
        .collect()
}

/// `y,u,uy` rows; `uy` is sampled from `trace_dy` at the trace nodes.
pub fn trace_csv(trace: &TraceProfile, trace_dy: &TraceProfile) -> String {
    let mut s = String::from("y,u,uy\n");
    for (&y, &u) in trace.y_nodes.iter().zip(&trace.values) {
        let _ = writeln!(s, "{},{},{}", csv_number(y), csv_number(u), csv_number(trace_dy.eval(y)));
    }
    s
}

pub fn write_trace_csv(path: &Path, trace: &TraceProfile, trace_dy: &TraceProfile) -> Result<()> {
    write_text(path, &trace_csv(trace, trace_dy))
}

/// Reads `y,u,uy` into the trace and its derivative.
pub fn read_trace_csv(path: &Path) -> Result<(TraceProfile, TraceProfile)> {
    let rows = read_rows(path, "y,u,uy")?;
    let ys: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let u = TraceProfile::new(ys.clone(), rows.iter().map(|r| r[1]).collect())?;
    let uy = TraceProfile::new(ys, rows.iter().map(|r| r[2]).collect())?;
    Ok((u, uy))
}

/// Long-format `x,y,u`, `y` varying fastest.
pub fn field_csv(field: &Field) -> String {
    let s_ = field.spec;
    let (xs, ys) = (s_.xs(), s_.ys());
    let mut s = String::from("x,y,u\n");
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", csv_number(x), csv_number(y), csv_number(field.values[[i, j]]));
        }
    }
    s
}

pub fn write_field_csv(path: &Path, field: &Field) -> Result<()> {
    write_text(path, &field_csv(field))
}

pub fn speed_trace_csv(trace: &SpeedTrace) -> String {
    let mut s = String::from("time,level_y\n");
    for (&t, &y) in trace.times.iter().zip(&trace.level_positions) {
        let _ = writeln!(s, "{},{}", csv_number(t), csv_number(y));
    }
    s
}

pub fn write_speed_trace_csv(path: &Path, trace: &SpeedTrace) -> Result<()> {
    write_text(path, &speed_trace_csv(trace))
}

pub fn read_speed_trace_csv(path: &Path) -> Result<SpeedTrace> {
    let rows = read_rows(path, "time,level_y")?;
    Ok(SpeedTrace {
        times: rows.iter().map(|r| r[0]).collect(),
        level_positions: rows.iter().map(|r| r[1]).collect(),
    })
}

/// Metadata record of a front bundle.
pub fn front_meta(sol: &FrontSolution) -> String {
    let g = sol.minimizer_grid;
    format_kv(&[
        ("c", sol.speed.to_string()),
        ("mu", sol.mu.to_string()),
        ("lambda_a", sol.multiplier.to_string()),
        ("I_a", sol.infimum.to_string()),
        ("c_from_I_a", sol.speed_from_infimum.to_string()),
        ("a", sol.a.to_string()),
        ("nx", g.nx.to_string()),
        ("ny", g.ny.to_string()),
        ("x_max", sol.front.spec.x_max.to_string()),
        ("y_min", sol.front.spec.y_min.to_string()),
        ("y_max", sol.front.spec.y_max.to_string()),
        ("resolved_y_min", sol.resolved_y_min.to_string()),
        ("iterations", sol.iterations.to_string()),
        ("residual_interior", sol.residuals.interior.to_string()),
        ("residual_boundary", sol.residuals.boundary.to_string()),
    ])
}

/// Writes `trace.csv`, `meta.txt` and optionally `field.csv` into `dir`.
pub fn write_front_bundle(dir: &Path, sol: &FrontSolution, with_field: bool) -> Result<()> {
    let dy = crate::analysis::trace_derivative(&sol.trace);
    write_trace_csv(&dir.join("trace.csv"), &sol.trace, &dy)?;
    write_text(&dir.join("meta.txt"), &front_meta(sol))?;
    if with_field {
        write_field_csv(&dir.join("field.csv"), &sol.front)?;
    }
    Ok(())
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_kv(&text)?.into_iter().collect())
}
