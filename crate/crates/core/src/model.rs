//! Flow parameters, the initial-curve catalog and exact circle solutions.
//!
//! A circle of radius `r(t)` with uniform outward normal speed solves the
//! flow (with `beta = 0`) iff `r'' = -1/r`. The first integral
//! `r'^2/2 = ln(r0/r) + V0^2/2` gives the turning radius `r0 exp(V0^2/2)` for
//! `V0 > 0`, and for `V0 = 0` the closed form
//! `t = sqrt(pi/2) r0 erf(sqrt(ln(r0/r)))`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PeriodicGridFunction, Vec2, MIN_POINTS};
use crate::ode::{Control, DormandPrince};
use crate::special::erfc;

/// Thresholds that end a run early with [`Error::BlowUpDetected`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopThresholds {
    /// Trip when `K^m_inf` exceeds this.
    pub k_cap: f64,
    /// Trip when the length drops below this fraction of the initial length.
    pub length_floor: f64,
    /// Trip when `min q < min_q_ratio * mean q`.
    pub min_q_ratio: f64,
}

impl Default for StopThresholds {
    fn default() -> Self {
        StopThresholds {
            k_cap: 1e4,
            length_floor: 1e-4,
            min_q_ratio: 1e-6,
        }
    }
}

/// Physical and discretization parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub beta: f64,
    pub v0: f64,
    pub j: usize,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub stop: StopThresholds,
}

impl FlowParams {
    /// Parameters with `dt` snapped to `T / M` for the nearest integer `M`.
    pub fn new(beta: f64, v0: f64, j: usize, dt: f64, t_final: f64) -> Result<Self> {
        let p = FlowParams {
            beta,
            v0,
            j,
            dt,
            t_final,
            snapshot_stride: 1,
            stop: StopThresholds::default(),
        };
        p.validate()?;
        let m = p.num_steps();
        Ok(FlowParams { dt: t_final / m as f64, ..p })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be >= 0, got {}", self.beta));
        }
        if !self.v0.is_finite() {
            return bad(format!("V0 must be finite, got {}", self.v0));
        }
        if self.j < MIN_POINTS {
            return bad(format!("J must be >= {MIN_POINTS}, got {}", self.j));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_final >= self.dt) || !self.t_final.is_finite() {
            return bad(format!("T must be >= dt, got T = {}", self.t_final));
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be positive".into());
        }
        let s = &self.stop;
        if !(s.k_cap > 0.0) || !(s.length_floor >= 0.0) || !(s.min_q_ratio >= 0.0) {
            return bad("stop thresholds must be nonnegative (k_cap positive)".into());
        }
        Ok(())
    }

    /// `M = T / dt`, rounded to the nearest integer.
    pub fn num_steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.j as f64
    }
}

/// Initial curves. All are counterclockwise, so `tau.perp()` is outward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum InitialCurveSpec {
    Circle { r0: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r0 (cos g(2 pi rho), sin g(2 pi rho))` with `g(u) = u + eps sin u`.
    PerturbedCircle { r0: f64, eps: f64 },
    /// Smooth nonconvex curve, elongated along `x1` with a waist at the origin.
    Dumbbell { neck: f64, scale: f64 },
}

impl InitialCurveSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialCurveSpec::Circle { r0 } => r0 > 0.0,
            InitialCurveSpec::Ellipse { a, b } => a > 0.0 && b > 0.0,
            // g' = 1 + eps cos u must stay positive
            InitialCurveSpec::PerturbedCircle { r0, eps } => r0 > 0.0 && eps.abs() < 1.0,
            InitialCurveSpec::Dumbbell { neck, scale } => neck > 0.0 && neck < 1.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid initial curve {self:?}")))
        }
    }

    pub fn dumbbell() -> Self {
        InitialCurveSpec::Dumbbell { neck: 0.12, scale: 2.0 }
    }

    /// `x_0(rho)`.
    pub fn eval(&self, rho: f64) -> Vec2 {
        let u = TAU * rho;
        match *self {
            InitialCurveSpec::Circle { r0 } => Vec2::new(r0 * u.cos(), r0 * u.sin()),
            InitialCurveSpec::Ellipse { a, b } => Vec2::new(a * u.cos(), b * u.sin()),
            InitialCurveSpec::PerturbedCircle { r0, eps } => {
                let g = u + eps * u.sin();
                Vec2::new(r0 * g.cos(), r0 * g.sin())
            }
            InitialCurveSpec::Dumbbell { neck, scale } => {
                let (s, c) = u.sin_cos();
                Vec2::new(
                    0.5 * scale * (1.0 + c * c) * c,
                    0.5 * scale * (neck + c * c) * s,
                )
            }
        }
    }

    /// Samples `x_0` at `rho_k = k/J`.
    pub fn sample(&self, j: usize) -> Result<PeriodicGridFunction> {
        self.validate()?;
        PeriodicGridFunction::sample(j, |rho| self.eval(rho))
    }
}

pub fn eval_initial_curve(spec: &InitialCurveSpec, rho: f64) -> Vec2 {
    spec.eval(rho)
}

/// `sqrt(pi/2) r0`, when a circle starting at rest collapses to a point.
pub fn extinction_time(r0: f64) -> f64 {
    (PI / 2.0).sqrt() * r0
}

/// Solves `erfc(s) = target` for `s >= 0` by a bracketed Illinois secant
/// iteration with bisection fallback.
fn inverse_erfc_bracketed(target: f64) -> f64 {
    if target >= 1.0 {
        return 0.0;
    }
    let f = |s: f64| erfc(s) - target;
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    let mut hi = 1.0;
    let mut f_hi = f(hi);
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        // secant point, falling back to bisection when it leaves the bracket
        let mut s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let fs = f(s);
        if fs == 0.0 {
            return s;
        }
        if fs > 0.0 {
            lo = s;
            f_lo = fs;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            f_hi = fs;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `s(t) = sqrt(ln(r0 / r(t)))` for the circle starting at rest.
fn circle_log_depth(r0: f64, t: f64) -> Result<f64> {
    let t_ext = extinction_time(r0);
    if !(t >= 0.0) || t >= t_ext {
        return Err(Error::BeyondExtinction { t, extinction: t_ext });
    }
    // erf(s) = t / t_ext, solved as erfc(s) = 1 - t/t_ext
    Ok(inverse_erfc_bracketed((t_ext - t) / t_ext))
}

/// Radius of the circle with `r(0) = r0`, `r'(0) = 0` at time `t`.
pub fn circle_radius_exact_v0(r0: f64, t: f64) -> Result<f64> {
    let s = circle_log_depth(r0, t)?;
    Ok(r0 * (-s * s).exp())
}

/// `(r(t), r'(t))` for the circle starting at rest; `r' <= 0` throughout.
pub fn circle_state_exact_v0(r0: f64, t: f64) -> Result<(f64, f64)> {
    let s = circle_log_depth(r0, t)?;
    Ok((r0 * (-s * s).exp(), -std::f64::consts::SQRT_2 * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleRadiusState {
    pub r: f64,
    pub rdot: f64,
    pub t: f64,
}

impl CircleRadiusState {
    /// `rdot^2/2 - ln(r0/r) - V0^2/2`, zero along exact trajectories.
    pub fn first_integral_defect(&self, r0: f64, v0: f64) -> f64 {
        0.5 * self.rdot * self.rdot - (r0 / self.r).ln() - 0.5 * v0 * v0
    }
}

/// Integrated radius trajectory; `extinct_at` is set when the radius
/// collapsed before `t_end`.
#[derive(Debug, Clone)]
pub struct RadiusTrajectory {
    pub samples: Vec<CircleRadiusState>,
    pub extinct_at: Option<f64>,
}

impl RadiusTrajectory {
    /// The samples, or `ExtinctBefore` if the circle collapsed early.
    pub fn complete(self) -> Result<Vec<CircleRadiusState>> {
        match self.extinct_at {
            Some(t) => Err(Error::ExtinctBefore { t }),
            None => Ok(self.samples),
        }
    }
}

/// Radius below which (relative to `r0`) the circle counts as extinct.
pub const R_EXTINCT_REL: f64 = 1e-6;

/// Integrates `r'' = -1/r`, `r(0) = r0`, `r'(0) = V0` to `t_end` or until
/// `r < 1e-6 r0`, recording every accepted step plus the times in `stops`.
pub fn circle_radius_ode_with_stops(
    r0: f64,
    v0: f64,
    t_end: f64,
    stops: &[f64],
) -> Result<RadiusTrajectory> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidParams(format!("r0 must be positive, got {r0}")));
    }
    let r_ext = R_EXTINCT_REL * r0;
    let mut samples = Vec::new();
    let mut extinct_at = None;
    let dp = DormandPrince::new(1e-12);
    dp.integrate(
        |_, y, dy| {
            if !(y[0] > 0.0) {
                return Err(Error::ExtinctBefore { t: f64::NAN });
            }
            dy[0] = y[1];
            dy[1] = -1.0 / y[0];
            Ok(())
        },
        0.0,
        vec![r0, v0],
        t_end,
        stops,
        |t, y| {
            samples.push(CircleRadiusState { r: y[0], rdot: y[1], t });
            if y[0] < r_ext {
                extinct_at = Some(t);
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )
    .map_err(|e| match e {
        Error::StepSizeUnderflow { t } => Error::ExtinctBefore { t },
        e => e,
    })?;
    Ok(RadiusTrajectory { samples, extinct_at })
}

/// Radius trajectory from the ODE oracle; fails with `ExtinctBefore` if the
/// circle collapses before `t_end`.
pub fn circle_radius_ode(r0: f64, v0: f64, t_end: f64) -> Result<Vec<CircleRadiusState>> {
    circle_radius_ode_with_stops(r0, v0, t_end, &[])?.complete()
}

/// State of maximal radius of an initially expanding circle (`V0 > 0`),
/// located to integrator accuracy by a secant search on `r'(t) = 0`. For
/// `V0 <= 0` the radius is maximal at `t = 0`.
pub fn circle_turning_point(r0: f64, v0: f64) -> Result<CircleRadiusState> {
    let start = CircleRadiusState { r: r0, rdot: v0, t: 0.0 };
    if v0 <= 0.0 {
        return Ok(start);
    }
    let dp = DormandPrince::new(1e-13);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy[0] = y[1];
        dy[1] = -1.0 / y[0];
        Ok(())
    };
    // bracket the sign change of r'
    let mut before = start;
    let mut after = None;
    // the turn happens well before r0 e^{V0^2/2} (1 + V0) time units
    let horizon = 10.0 * r0 * (0.5 * v0 * v0).exp() * (1.0 + v0);
    dp.integrate(rhs, 0.0, vec![r0, v0], horizon, &[], |t, y| {
        if y[1] <= 0.0 {
            after = Some(CircleRadiusState { r: y[0], rdot: y[1], t });
            Control::Stop
        } else {
            before = CircleRadiusState { r: y[0], rdot: y[1], t };
            Control::Continue
        }
    })?;
    let mut b = after.ok_or(Error::InvalidParams("no turning point found".into()))?;
    let mut a = before;
    let advance = |from: &CircleRadiusState, t: f64| -> Result<CircleRadiusState> {
        if t == from.t {
            return Ok(*from);
        }
        let fin = dp.integrate(rhs, from.t, vec![from.r, from.rdot], t, &[], |_, _| Control::Continue)?;
        Ok(CircleRadiusState { r: fin.y[0], rdot: fin.y[1], t })
    };
    for _ in 0..60 {
        let mut t = a.t - a.rdot * (b.t - a.t) / (b.rdot - a.rdot);
        if !(t > a.t && t < b.t) {
            t = 0.5 * (a.t + b.t);
        }
        let c = advance(&a, t)?;
        if c.rdot == 0.0 || (b.t - a.t) < 1e-15 {
            return Ok(c);
        }
        if c.rdot > 0.0 {
            a = c;
        } else {
            b = c;
        }
        if a.rdot.abs() < 1e-15 {
            return Ok(a);
        }
        if b.rdot.abs() < 1e-15 {
            return Ok(b);
        }
    }
    Ok(if a.rdot.abs() < b.rdot.abs() { a } else { b })
}

/// The shrinking perturbed circle `r(t) (cos g(2 pi rho), sin g(2 pi rho))`,
/// `g(u) = u + eps sin u`, with `r` the at-rest circle radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolution {
    pub r0: f64,
    pub eps: f64,
}

impl Default for ReferenceSolution {
    fn default() -> Self {
        ReferenceSolution { r0: 1.0, eps: 0.1 }
    }
}

/// Position, velocity and their derivatives of the reference solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub x: Vec2,
    pub xt: Vec2,
    pub xtt: Vec2,
    /// Unit tangent `x_rho / |x_rho|`.
    pub tau: Vec2,
}

impl ReferenceSolution {
    pub fn initial_curve(&self) -> InitialCurveSpec {
        InitialCurveSpec::PerturbedCircle { r0: self.r0, eps: self.eps }
    }

    pub fn extinction_time(&self) -> f64 {
        extinction_time(self.r0)
    }

    fn angle(&self, rho: f64) -> f64 {
        let u = TAU * rho;
        u + self.eps * u.sin()
    }

    pub fn eval(&self, t: f64, rho: f64) -> Result<ReferenceSample> {
        let (r, rdot) = circle_state_exact_v0(self.r0, t)?;
        Ok(self.eval_with_radius(r, rdot, rho))
    }

    /// Evaluation with `(r, r')` supplied, so a grid can share one radius solve.
    pub fn eval_with_radius(&self, r: f64, rdot: f64, rho: f64) -> ReferenceSample {
        let (s, c) = self.angle(rho).sin_cos();
        let e = Vec2::new(c, s);
        ReferenceSample {
            x: e * r,
            xt: e * rdot,
            xtt: e * (-1.0 / r),
            tau: Vec2::new(-s, c),
        }
    }

    /// Position and velocity sampled on a grid of size `j` at time `t`.
    pub fn sample_grid(
        &self,
        t: f64,
        j: usize,
    ) -> Result<(PeriodicGridFunction, PeriodicGridFunction)> {
        let (r, rdot) = circle_state_exact_v0(self.r0, t)?;
        let pts: Vec<ReferenceSample> = (0..j)
            .map(|k| self.eval_with_radius(r, rdot, k as f64 / j as f64))
            .collect();
        Ok((
            PeriodicGridFunction::new(pts.iter().map(|p| p.x).collect())?,
            PeriodicGridFunction::new(pts.iter().map(|p| p.xt).collect())?,
        ))
    }
}

/// `(x(rho, t), x_t(rho, t))` of the reference solution.
pub fn reference_solution(r0: f64, t: f64, rho: f64) -> Result<(Vec2, Vec2)> {
    let s = ReferenceSolution { r0, eps: 0.1 }.eval(t, rho)?;
    Ok((s.x, s.xt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::signed_area;

    fn bisection_radius(r0: f64, t: f64) -> f64 {
        // independent oracle: plain bisection on t - sqrt(pi/2) r0 erf(sqrt(ln(r0/r)))
        let g = |r: f64| t - extinction_time(r0) * crate::special::erf((r0 / r).ln().sqrt());
        let (mut lo, mut hi) = (1e-300_f64, r0);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            // g increases with r
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-17 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn initial_curve_values() {
        let p = InitialCurveSpec::Circle { r0: 1.0 }.eval(0.0);
        assert_eq!(p, Vec2::new(1.0, 0.0));
        let p = InitialCurveSpec::Ellipse { a: 1.5, b: 1.0 }.eval(0.25);
        assert!(p.x.abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        let p = InitialCurveSpec::PerturbedCircle { r0: 1.0, eps: 0.1 }.eval(0.25);
        assert!((p.x + 0.09983).abs() < 1e-5 && (p.y - 0.99500).abs() < 1e-5);
        let g = std::f64::consts::FRAC_PI_2 + 0.1;
        assert!((p.x - g.cos()).abs() < 1e-15 && (p.y - g.sin()).abs() < 1e-15);
    }

    #[test]
    fn curves_are_periodic_and_counterclockwise() {
        let specs = [
            InitialCurveSpec::Circle { r0: 1.0 },
            InitialCurveSpec::Ellipse { a: 1.5, b: 1.0 },
            InitialCurveSpec::PerturbedCircle { r0: 1.0, eps: 0.1 },
            InitialCurveSpec::dumbbell(),
        ];
        for s in specs {
            for &rho in &[0.0, 0.13, 0.5, 0.77] {
                assert!((s.eval(rho) - s.eval(rho + 1.0)).norm() < 1e-12);
            }
            assert!(signed_area(&s.sample(512).unwrap()) > 0.0, "{s:?}");
        }
    }

    #[test]
    fn dumbbell_is_nonconvex() {
        let x = InitialCurveSpec::dumbbell().sample(256).unwrap();
        let n = x.len();
        let turns: Vec<f64> = (0..n)
            .map(|k| (x[k] - x.at(k as isize - 1)).cross(x.at(k as isize + 1) - x[k]))
            .collect();
        assert!(turns.iter().any(|&c| c < 0.0));
        assert!(turns.iter().any(|&c| c > 0.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(InitialCurveSpec::Circle { r0: 0.0 }.validate().is_err());
        assert!(InitialCurveSpec::PerturbedCircle { r0: 1.0, eps: 1.5 }.validate().is_err());
        assert!(InitialCurveSpec::Dumbbell { neck: 1.2, scale: 1.0 }.validate().is_err());
    }

    #[test]
    fn exact_radius_basics() {
        assert_eq!(circle_radius_exact_v0(1.0, 0.0).unwrap(), 1.0);
        assert!((extinction_time(1.0) - 1.25331).abs() < 1e-5);
        assert!(matches!(
            circle_radius_exact_v0(1.0, 1.26),
            Err(Error::BeyondExtinction { .. })
        ));
        let mut prev = 1.0;
        for i in 1..125 {
            let r = circle_radius_exact_v0(1.0, i as f64 * 0.01).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn exact_radius_matches_bisection() {
        for &r0 in &[0.5, 1.0, 2.0] {
            for i in 0..20 {
                let t = 0.95 * extinction_time(r0) * i as f64 / 19.0;
                let a = circle_radius_exact_v0(r0, t).unwrap();
                let b = bisection_radius(r0, t);
                assert!(((a - b) / b).abs() < 1e-12, "r0={r0} t={t}: {a} vs {b}");
                // defining relation
                let back = extinction_time(r0) * crate::special::erf((r0 / a).ln().sqrt());
                assert!((back - t).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ode_agrees_with_closed_form() {
        for &r0 in &[0.5, 1.0, 2.0] {
            let t_end = 0.95 * extinction_time(r0);
            let traj = circle_radius_ode(r0, 0.0, t_end).unwrap();
            for s in &traj {
                let r = circle_radius_exact_v0(r0, s.t).unwrap();
                assert!(((s.r - r) / r).abs() < 1e-9, "r0={r0} t={}: {} vs {r}", s.t, s.r);
                assert!(s.first_integral_defect(r0, 0.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ode_expanding_circle_peaks_at_turning_radius() {
        let traj = circle_radius_ode_with_stops(1.0, 1.0, 5.0, &[]).unwrap();
        let r_max = traj.samples.iter().map(|s| s.r).fold(0.0, f64::max);
        let peak = circle_turning_point(1.0, 1.0).unwrap();
        assert!(peak.r >= r_max - 1e-12);
        assert!((peak.r - 0.5f64.exp()).abs() < 1e-9, "{}", peak.r);
        assert!((peak.r - 1.64872).abs() < 1e-5);
        assert_eq!(circle_turning_point(1.0, -1.0).unwrap().r, 1.0);
        assert!(traj.extinct_at.is_some());
        for s in &traj.samples {
            assert!(s.first_integral_defect(1.0, 1.0).abs() < 1e-9, "t={} r={}", s.t, s.r);
        }
        assert!(matches!(
            circle_radius_ode(1.0, 1.0, 10.0),
            Err(Error::ExtinctBefore { .. })
        ));
    }

    #[test]
    fn ode_inward_circle_shrinks_monotonically() {
        let traj = circle_radius_ode_with_stops(1.0, -1.0, 2.0, &[]).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[1].r < w[0].r));
        assert!(traj.extinct_at.is_some());
    }

    #[test]
    fn reference_solution_structure() {
        let (x, v) = reference_solution(1.0, 0.0, 0.0).unwrap();
        assert_eq!(x, Vec2::new(1.0, 0.0));
        assert_eq!(v, Vec2::ZERO);
        let r = circle_radius_exact_v0(1.0, 0.5).unwrap();
        let (x, v) = reference_solution(1.0, 0.5, 0.125).unwrap();
        let g = std::f64::consts::FRAC_PI_4 + 0.1 * std::f64::consts::FRAC_PI_4.sin();
        assert!((x - Vec2::new(g.cos(), g.sin()) * r).norm() < 1e-15);
        let reference = ReferenceSolution::default();
        for i in 0..50 {
            let rho = i as f64 / 50.0;
            let s = reference.eval(0.7, rho).unwrap();
            assert!((s.x.norm() - reference.eval(0.7, 0.0).unwrap().x.norm()).abs() < 1e-14);
            // normal parameterization
            assert!(s.xt.dot(s.tau).abs() < 1e-12);
        }
        assert!(v.norm() > 0.0);
    }
}
