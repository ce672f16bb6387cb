//! Error norms against reference solutions, experimental orders of
//! convergence, consistency residuals and per-step monitors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{
    backward_difference, compute_geometry, curvature_sup, discrete_energy, norm_0h, norm_1h,
    polygon_length, PeriodicGridFunction, Vec2,
};
use crate::model::{circle_state_exact_v0, FlowParams, ReferenceSolution};
use crate::solver::scheme::discrete_curvature_vector;
use crate::solver::{init_states, run, SolverState, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub m: usize,
    pub t: f64,
    pub length: f64,
    pub kinf: f64,
    pub inv_kinf: f64,
    pub energy: f64,
    pub min_q: f64,
}

/// Monitors of the current level; the energy uses the backward-difference velocity.
pub fn record_step(state: &SolverState) -> Result<DiagnosticsRecord> {
    let g = compute_geometry(&state.x_curr)?;
    let kinf = curvature_sup(&g);
    Ok(DiagnosticsRecord {
        m: state.m,
        t: state.t(),
        length: polygon_length(&g),
        kinf,
        inv_kinf: 1.0 / kinf,
        energy: discrete_energy(&g, &state.velocity()),
        min_q: g.min_q(),
    })
}

/// Exact solution sampled on the grid: position and velocity at time `t`.
pub trait ReferenceSampler {
    fn sample(&self, t: f64, j: usize) -> Result<(PeriodicGridFunction, PeriodicGridFunction)>;
}

impl ReferenceSampler for ReferenceSolution {
    fn sample(&self, t: f64, j: usize) -> Result<(PeriodicGridFunction, PeriodicGridFunction)> {
        self.sample_grid(t, j)
    }
}

/// Levels `x^0, ..., x^M` of a completed run with uniform step `dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub levels: Vec<PeriodicGridFunction>,
}

impl Trajectory {
    pub fn t(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }
}

fn diff(a: &PeriodicGridFunction, b: &PeriodicGridFunction) -> PeriodicGridFunction {
    a.zip_with(b, |p, q| p - q)
}

/// `max_{m=0..M} ||x(t_m) - x^m||_{1,h}`.
pub fn error_position(reference: &impl ReferenceSampler, traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (m, xm) in traj.levels.iter().enumerate() {
        let (x, _) = reference.sample(traj.t(m), xm.len())?;
        worst = worst.max(norm_1h(&diff(&x, xm)));
    }
    Ok(worst)
}

/// `max_{m=1..M-1} ||x_t(t_m) - (x^{m+1} - x^{m-1}) / (2 dt)||_{0,h}`.
pub fn error_velocity(reference: &impl ReferenceSampler, traj: &Trajectory) -> Result<f64> {
    let n = traj.levels.len();
    if n < 3 {
        return Err(Error::InvalidParams("velocity error needs M >= 2".into()));
    }
    let mut worst: f64 = 0.0;
    for m in 1..n - 1 {
        let j = traj.levels[m].len();
        let (_, v) = reference.sample(traj.t(m), j)?;
        let inv = 0.5 / traj.dt;
        let central = traj.levels[m + 1].zip_with(&traj.levels[m - 1], |a, b| (a - b) * inv);
        worst = worst.max(norm_0h(&diff(&v, &central)));
    }
    Ok(worst)
}

/// Streaming version of [`error_position`] and [`error_velocity`], fed one
/// level at a time so long runs need not be stored.
#[derive(Debug, Clone)]
pub struct ErrorAccumulator<R> {
    reference: R,
    dt: f64,
    // (m, x^m) for the two most recent levels
    older: Option<(usize, PeriodicGridFunction)>,
    newer: Option<(usize, PeriodicGridFunction)>,
    pub pos_err: f64,
    pub vel_err: f64,
    pub levels_seen: usize,
}

impl<R: ReferenceSampler> ErrorAccumulator<R> {
    pub fn new(reference: R, dt: f64) -> Self {
        ErrorAccumulator {
            reference,
            dt,
            older: None,
            newer: None,
            pos_err: 0.0,
            vel_err: 0.0,
            levels_seen: 0,
        }
    }

    /// Feeds level `m`; levels must arrive in order `0, 1, 2, ...`.
    pub fn push(&mut self, m: usize, x: &PeriodicGridFunction) -> Result<()> {
        let j = x.len();
        let (xr, _) = self.reference.sample(m as f64 * self.dt, j)?;
        self.pos_err = self.pos_err.max(norm_1h(&diff(&xr, x)));
        if let (Some((m_old, x_old)), Some((m_mid, _))) = (&self.older, &self.newer) {
            debug_assert_eq!(m_old + 2, m);
            let (_, v) = self.reference.sample(*m_mid as f64 * self.dt, j)?;
            let inv = 0.5 / self.dt;
            let central = x.zip_with(x_old, |a, b| (a - b) * inv);
            self.vel_err = self.vel_err.max(norm_0h(&diff(&v, &central)));
        }
        self.older = self.newer.take();
        self.newer = Some((m, x.clone()));
        self.levels_seen += 1;
        Ok(())
    }
}

/// `ln(e_coarse / e_fine) / ln(h_coarse / h_fine)`.
pub fn eoc(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub j: usize,
    pub pos_err: f64,
    pub vel_err: f64,
    pub eoc_pos: Option<f64>,
    pub eoc_vel: Option<f64>,
}

/// Fills in the EOC columns from consecutive rows (sorted by increasing `J`).
pub fn with_eocs(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[i].eoc_pos = None;
            rows[i].eoc_vel = None;
            continue;
        }
        let (c, f) = (rows[i - 1], rows[i]);
        let hc = 1.0 / c.j as f64;
        let hf = 1.0 / f.j as f64;
        rows[i].eoc_pos = Some(eoc(c.pos_err, f.pos_err, hc, hf));
        rows[i].eoc_vel = Some(eoc(c.vel_err, f.vel_err, hc, hf));
    }
}

/// Runs the scheme from the reference solution's initial curve at `J` points
/// with `dt = h` up to `t_final` and measures both error columns on the fly.
/// A run that stops early is an error.
pub fn convergence_level(reference: ReferenceSolution, j: usize, t_final: f64) -> Result<ConvergenceRow> {
    let params = FlowParams::new(0.0, 0.0, j, 1.0 / j as f64, t_final)?;
    let state = init_states(&reference.initial_curve(), &params)?;
    let mut acc = ErrorAccumulator::new(reference, params.dt);
    let mut failure = None;
    let outcome = run(state, |s| {
        if failure.is_none() {
            if let Err(e) = acc.push(s.m, &s.x_curr) {
                failure = Some(e);
            }
        }
    });
    if let Termination::Aborted(e) = outcome.termination {
        return Err(e);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ConvergenceRow { j, pos_err: acc.pos_err, vel_err: acc.vel_err, eoc_pos: None, eoc_vel: None })
}

/// Point values of a smooth time-dependent curve and the derivatives the
/// consistency residuals need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothSample {
    pub x: Vec2,
    pub xt: Vec2,
    pub xtt: Vec2,
    pub tau: Vec2,
    pub tau_t: Vec2,
}

pub trait SmoothSampler {
    fn point(&self, t: f64, rho: f64) -> Result<SmoothSample>;
}

impl SmoothSampler for ReferenceSolution {
    fn point(&self, t: f64, rho: f64) -> Result<SmoothSample> {
        let s = self.eval(t, rho)?;
        // the tangent of a uniformly scaled curve does not rotate
        Ok(SmoothSample { x: s.x, xt: s.xt, xtt: s.xtt, tau: s.tau, tau_t: Vec2::ZERO })
    }
}

/// A circle of fixed radius with zero velocity; not a solution of the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryCircle {
    pub r0: f64,
}

impl SmoothSampler for StationaryCircle {
    fn point(&self, _t: f64, rho: f64) -> Result<SmoothSample> {
        let (s, c) = (std::f64::consts::TAU * rho).sin_cos();
        Ok(SmoothSample {
            x: Vec2::new(c, s) * self.r0,
            xt: Vec2::ZERO,
            xtt: Vec2::ZERO,
            tau: Vec2::new(-s, c),
            tau_t: Vec2::ZERO,
        })
    }
}

impl ReferenceSolution {
    /// Grid samples at time `t`, sharing one radius solve across all points.
    pub fn smooth_grid(&self, t: f64, j: usize) -> Result<Vec<SmoothSample>> {
        let (r, rdot) = circle_state_exact_v0(self.r0, t)?;
        Ok((0..j)
            .map(|k| {
                let s = self.eval_with_radius(r, rdot, k as f64 / j as f64);
                SmoothSample { x: s.x, xt: s.xt, xtt: s.xtt, tau: s.tau, tau_t: Vec2::ZERO }
            })
            .collect())
    }
}

/// Per-vertex residuals `R_k` and `R~_k` of the semidiscrete system for
/// sampled data.
#[derive(Debug, Clone)]
pub struct ConsistencyResiduals {
    pub r: Vec<Vec2>,
    pub r_tilde: Vec<f64>,
}

impl ConsistencyResiduals {
    pub fn max_r(&self) -> f64 {
        self.r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_r_tilde(&self) -> f64 {
        self.r_tilde.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

pub fn consistency_residual_fields(
    samples: &[SmoothSample],
    beta: f64,
) -> Result<ConsistencyResiduals> {
    let x = PeriodicGridFunction::new(samples.iter().map(|s| s.x).collect())?;
    let v = PeriodicGridFunction::new(samples.iter().map(|s| s.xt).collect())?;
    let g = compute_geometry(&x)?;
    let kappa = discrete_curvature_vector(&g);
    let dv = backward_difference(&v);

    let r = samples
        .iter()
        .enumerate()
        .map(|(k, s)| s.xtt + s.xt * beta - kappa[k] + s.tau * s.xt.dot(s.tau_t))
        .collect();

    let power: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| g.vertex_q(k) * (s.xt.dot(s.xtt) + beta * s.xt.norm_sq()))
        .collect();
    let r_tilde = (0..g.len())
        .map(|k| {
            let qdot = dv[k].dot(g.tau[k]);
            qdot + 0.5 * power[g.prev(k)] + 0.5 * power[k]
        })
        .collect();
    Ok(ConsistencyResiduals { r, r_tilde })
}

/// `(max_k |R_k|, max_k |R~_k|)` at time `t` on a grid of size `j`.
pub fn consistency_residuals(
    sampler: &impl SmoothSampler,
    t: f64,
    j: usize,
    beta: f64,
) -> Result<(f64, f64)> {
    let samples = (0..j)
        .map(|k| sampler.point(t, k as f64 / j as f64))
        .collect::<Result<Vec<_>>>()?;
    let res = consistency_residual_fields(&samples, beta)?;
    Ok((res.max_r(), res.max_r_tilde()))
}
