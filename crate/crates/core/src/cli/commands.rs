//! The three subcommands: `evolve`, `converge` and `exact-circle`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{self, Manifest, QUALITATIVE, QUANTITATIVE};
use super::CliError;
use crate::diagnostics::{convergence_level, record_step, with_eocs, ConvergenceRow, DiagnosticsRecord};
use crate::error::Error;
use crate::grid::PeriodicGridFunction;
use crate::model::{
    circle_radius_ode_with_stops, circle_state_exact_v0, circle_turning_point, extinction_time,
    CircleRadiusState, InitialCurveSpec, ReferenceSolution, R_EXTINCT_REL,
};
use crate::solver::{init_states, run, Termination};
use crate::special::erfc;

/// What `evolve` produced.
#[derive(Debug, Clone)]
pub struct EvolveSummary {
    pub out_dir: PathBuf,
    pub termination: Termination,
    pub final_time: f64,
    pub abort_time: Option<f64>,
    pub records: Vec<DiagnosticsRecord>,
    /// `(m, x^m)` for every written snapshot.
    pub snapshots: Vec<(usize, PeriodicGridFunction)>,
}

impl EvolveSummary {
    pub fn aborted(&self) -> bool {
        self.termination != Termination::ReachedT
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs one configuration and writes `series.csv`, `snap_<m>.csv`,
/// `manifest.json` and (optionally) `curves.svg` into `out_dir`. A solver
/// abort is not an error here: the artifacts are still written and the
/// summary carries the termination reason.
pub fn run_evolve(config: &RunConfig, preset: Option<&str>, out_dir: &Path) -> Result<EvolveSummary, CliError> {
    let params = config.params()?;
    create_dir(out_dir)?;
    let started = Instant::now();

    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut monitor_error = None;
    let outcome = match init_states(&config.curve, &params) {
        Ok(state) => run(state, |s| {
            match record_step(s) {
                Ok(r) => records.push(r),
                Err(e) => {
                    monitor_error.get_or_insert(e);
                }
            }
            if s.m % params.snapshot_stride == 0 {
                snapshots.push((s.m, s.x_curr.clone()));
            }
        }),
        Err(e @ (Error::InvalidParams(_) | Error::BeyondExtinction { .. })) => {
            return Err(CliError::from_invalid(e))
        }
        Err(e) => {
            let termination = Termination::Aborted(e.clone());
            let manifest = Manifest {
                preset: preset.map(str::to_owned),
                config: config.clone(),
                termination: termination.reason_name().to_owned(),
                termination_detail: Some(e.to_string()),
                final_time: 0.0,
                abort_time: Some(0.0),
                steps: 0,
                wall_time_s: started.elapsed().as_secs_f64(),
                reproduction: if config.is_qualitative() { QUALITATIVE } else { QUANTITATIVE },
                snapshots: Vec::new(),
            };
            output::write_manifest(&out_dir.join("manifest.json"), &manifest)?;
            return Err(CliError::Solver(e));
        }
    };
    if let Some(e) = monitor_error {
        return Err(CliError::Solver(e));
    }
    // always keep the last accepted level
    if snapshots.last().map(|(m, _)| *m) != Some(outcome.last.m) {
        snapshots.push((outcome.last.m, outcome.last.x_curr.clone()));
    }

    output::write_series(&out_dir.join("series.csv"), &records)?;
    let mut names = Vec::with_capacity(snapshots.len());
    for (m, x) in &snapshots {
        let name = format!("snap_{m}.csv");
        output::write_snapshot(&out_dir.join(&name), x)?;
        names.push(name);
    }
    if config.svg {
        let curves: Vec<&PeriodicGridFunction> = snapshots.iter().map(|(_, x)| x).collect();
        let path = out_dir.join("curves.svg");
        fs::write(&path, output::render_svg(&curves)).map_err(|e| CliError::io(&path, e))?;
    }

    let final_time = outcome.last.t();
    let manifest = Manifest {
        preset: preset.map(str::to_owned),
        config: config.clone(),
        termination: outcome.termination.reason_name().to_owned(),
        termination_detail: match &outcome.termination {
            Termination::ReachedT => None,
            Termination::Aborted(e) => Some(e.to_string()),
        },
        final_time,
        abort_time: outcome.abort_time,
        steps: outcome.last.m,
        wall_time_s: started.elapsed().as_secs_f64(),
        reproduction: if config.is_qualitative() { QUALITATIVE } else { QUANTITATIVE },
        snapshots: names,
    };
    output::write_manifest(&out_dir.join("manifest.json"), &manifest)?;

    Ok(EvolveSummary {
        out_dir: out_dir.to_path_buf(),
        termination: outcome.termination,
        final_time,
        abort_time: outcome.abort_time,
        records,
        snapshots,
    })
}

/// What `converge` produced.
#[derive(Debug, Clone)]
pub struct ConvergeSummary {
    /// Rows of the levels that completed, by increasing `J`, with EOCs.
    pub rows: Vec<ConvergenceRow>,
    pub failures: Vec<(usize, Error)>,
    pub table: String,
}

/// Runs the perturbed-circle benchmark (`dt = h`) at each level in parallel
/// and writes `table1.csv` and `table1.txt`. Failed levels are reported and
/// left out of the table.
pub fn run_converge(levels: &[usize], base: &RunConfig, out_dir: &Path) -> Result<ConvergeSummary, CliError> {
    let reference = match base.curve {
        InitialCurveSpec::PerturbedCircle { r0, eps } if base.v0 == 0.0 && base.beta == 0.0 => {
            ReferenceSolution { r0, eps }
        }
        _ => {
            return Err(CliError::Config(
                "convergence runs need a perturbed circle at rest without damping".into(),
            ))
        }
    };
    if levels.is_empty() {
        return Err(CliError::Config("no levels given".into()));
    }
    if let Some(bad) = levels.iter().find(|&&j| j < crate::grid::MIN_POINTS) {
        return Err(CliError::Config(format!("level J = {bad} is too small")));
    }
    if !(base.t_final > 0.0) || base.t_final >= reference.extinction_time() {
        return Err(CliError::Config(format!(
            "T = {} must lie in (0, {})",
            base.t_final,
            reference.extinction_time()
        )));
    }
    create_dir(out_dir)?;

    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let results: Vec<(usize, crate::Result<ConvergenceRow>)> = levels
        .par_iter()
        .map(|&j| (j, convergence_level(reference, j, base.t_final)))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (j, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((j, e)),
        }
    }
    with_eocs(&mut rows);
    let table = output::format_table1(&rows);
    output::write_table1_csv(&out_dir.join("table1.csv"), &rows)?;
    let txt = out_dir.join("table1.txt");
    fs::write(&txt, &table).map_err(|e| CliError::io(&txt, e))?;
    Ok(ConvergeSummary { rows, failures, table })
}

/// Radius table of a circle with `r(0) = r0`, `r'(0) = v0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCircleTable {
    pub rows: Vec<CircleRadiusState>,
    /// Set when the circle collapsed (to `1e-6 r0`) before `t_end`; the last
    /// row is then the collapse state.
    pub extinct_at: Option<f64>,
}

/// Samples the circle radius at `samples` equally spaced times in
/// `[0, t_end]`: the closed form for `v0 = 0`, the ODE oracle otherwise.
/// For `v0 > 0` the turning point (maximal radius) is inserted as an extra
/// row when it falls inside the interval.
pub fn run_exact_circle(r0: f64, v0: f64, t_end: f64, samples: usize) -> Result<ExactCircleTable, CliError> {
    if !(r0 > 0.0) || !v0.is_finite() || !(t_end > 0.0) || !t_end.is_finite() || samples < 2 {
        return Err(CliError::Config(
            "need r0 > 0, finite v0, t_end > 0 and at least 2 samples".into(),
        ));
    }
    let times: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();

    if v0 == 0.0 {
        let t_ext = extinction_time(r0);
        let mut rows = Vec::with_capacity(samples + 1);
        for &t in times.iter().take_while(|&&t| t < t_ext) {
            let (r, rdot) = circle_state_exact_v0(r0, t).map_err(CliError::Solver)?;
            rows.push(CircleRadiusState { r, rdot, t });
        }
        // stop where the ODE oracle would: at r = 1e-6 r0
        let s = (1.0 / R_EXTINCT_REL).ln().sqrt();
        let t_stop = t_ext - t_ext * erfc(s);
        if t_end < t_stop {
            return Ok(ExactCircleTable { rows, extinct_at: None });
        }
        rows.retain(|row| row.t < t_stop);
        let collapse = CircleRadiusState { r: R_EXTINCT_REL * r0, rdot: -std::f64::consts::SQRT_2 * s, t: t_stop };
        rows.push(collapse);
        return Ok(ExactCircleTable { rows, extinct_at: Some(t_stop) });
    }

    let traj = circle_radius_ode_with_stops(r0, v0, t_end, &times[1..]).map_err(CliError::Solver)?;
    let mut rows: Vec<CircleRadiusState> =
        traj.samples.iter().filter(|s| s.t == 0.0 || times[1..].contains(&s.t)).copied().collect();
    if let Some(t) = traj.extinct_at {
        if let Some(last) = traj.samples.last() {
            if rows.last() != Some(last) {
                rows.push(*last);
            }
        }
        debug_assert_eq!(rows.last().map(|s| s.t), Some(t));
    }
    if v0 > 0.0 {
        let turn = circle_turning_point(r0, v0).map_err(CliError::Solver)?;
        let end = rows.last().map_or(0.0, |s| s.t);
        if turn.t < end && !rows.iter().any(|s| s.t == turn.t) {
            rows.push(turn);
            rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        }
    }
    Ok(ExactCircleTable { rows, extinct_at: traj.extinct_at })
}
