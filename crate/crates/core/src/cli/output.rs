//! File writers: CSV series and snapshots, the convergence table, the run
//! manifest and an SVG overlay of snapshots.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::CliError;
use crate::diagnostics::{ConvergenceRow, DiagnosticsRecord};
use crate::grid::PeriodicGridFunction;
use crate::model::CircleRadiusState;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}

/// 5 significant digits with a two-digit signed exponent, e.g. `3.9796e-03`.
pub fn fmt_table(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::io(path, e))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_series(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let err = |e| CliError::io(path, e);
    w.write_record(["m", "t", "length", "kinf", "inv_kinf", "energy", "min_q"]).map_err(err)?;
    for r in records {
        w.write_record([
            r.m.to_string(),
            fmt_csv(r.t),
            fmt_csv(r.length),
            fmt_csv(r.kinf),
            fmt_csv(r.inv_kinf),
            fmt_csv(r.energy),
            fmt_csv(r.min_q),
        ])
        .map_err(err)?;
    }
    finish(w, path)
}

pub fn write_snapshot(path: &Path, x: &PeriodicGridFunction) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let err = |e| CliError::io(path, e);
    w.write_record(["j", "x1", "x2"]).map_err(err)?;
    for (j, p) in x.values().iter().enumerate() {
        w.write_record([j.to_string(), fmt_csv(p.x), fmt_csv(p.y)]).map_err(err)?;
    }
    finish(w, path)
}

pub fn write_table1_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let err = |e| CliError::io(path, e);
    w.write_record(["J", "pos_err", "eoc_pos", "vel_err", "eoc_vel"]).map_err(err)?;
    let opt = |v: Option<f64>| v.map(fmt_csv).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.j.to_string(),
            fmt_csv(r.pos_err),
            opt(r.eoc_pos),
            fmt_csv(r.vel_err),
            opt(r.eoc_vel),
        ])
        .map_err(err)?;
    }
    finish(w, path)
}

/// Human-readable convergence table.
pub fn format_table1(rows: &[ConvergenceRow]) -> String {
    let mut out = format!(
        "{:>6}  {:>12}  {:>7}  {:>12}  {:>7}\n",
        "J", "pos_err", "EOC", "vel_err", "EOC"
    );
    let eoc = |v: Option<f64>| v.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into());
    for r in rows {
        out.push_str(&format!(
            "{:>6}  {:>12}  {:>7}  {:>12}  {:>7}\n",
            r.j,
            fmt_table(r.pos_err),
            eoc(r.eoc_pos),
            fmt_table(r.vel_err),
            eoc(r.eoc_vel)
        ));
    }
    out
}

pub fn write_radius_csv(out: impl Write, rows: &[CircleRadiusState]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "r", "rdot"])?;
    for s in rows {
        w.write_record([fmt_csv(s.t), fmt_csv(s.r), fmt_csv(s.rdot)])?;
    }
    w.flush()?;
    Ok(())
}

pub const QUALITATIVE: &str = "qualitative reproduction";
pub const QUANTITATIVE: &str = "quantitative";

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub preset: Option<String>,
    pub config: RunConfig,
    /// `ReachedT`, `BlowUpDetected`, `HairpinSingularity` or `DegenerateSegment`.
    pub termination: String,
    pub termination_detail: Option<String>,
    /// Time of the last accepted level.
    pub final_time: f64,
    /// Time of the step that tripped a threshold or failed, if any.
    pub abort_time: Option<f64>,
    pub steps: usize,
    pub wall_time_s: f64,
    pub reproduction: &'static str,
    pub snapshots: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Overlays closed polylines in an equal-aspect view box fitted to all of
/// them (SVG `y` points down, so the curves are mirrored in `x2`).
pub fn render_svg(curves: &[&PeriodicGridFunction]) -> String {
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in curves.iter().flat_map(|c| c.values()) {
        lo_x = lo_x.min(p.x);
        hi_x = hi_x.max(p.x);
        lo_y = lo_y.min(p.y);
        hi_y = hi_y.max(p.y);
    }
    if !lo_x.is_finite() {
        (lo_x, lo_y, hi_x, hi_y) = (-1.0, -1.0, 1.0, 1.0);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let pad = 0.05 * span;
    let stroke = span / 400.0;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"600\" height=\"{}\">\n",
        lo_x - pad,
        -hi_y - pad,
        hi_x - lo_x + 2.0 * pad,
        hi_y - lo_y + 2.0 * pad,
        (600.0 * (hi_y - lo_y + 2.0 * pad) / (hi_x - lo_x + 2.0 * pad)).round()
    );
    for c in curves {
        let pts: Vec<String> = c.values().iter().map(|p| format!("{:.6},{:.6}", p.x, -p.y)).collect();
        svg.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.6}\"/>\n",
            pts.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
