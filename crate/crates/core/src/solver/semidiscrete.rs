//! The semidiscrete system (space discrete, time continuous), integrated with
//! a tight-tolerance adaptive Runge–Kutta method. Serves as the time-exact
//! oracle for the two-step scheme.

use crate::error::{Error, Result};
use crate::grid::{backward_difference, compute_geometry, CurveGeometry, PeriodicGridFunction, Vec2};
use crate::ode::{Control, DormandPrince};

use super::scheme::discrete_curvature_vector;

#[derive(Debug, Clone, PartialEq)]
pub struct SemidiscreteState {
    pub x: PeriodicGridFunction,
    pub v: PeriodicGridFunction,
    pub t: f64,
}

/// Time derivatives of the segment tangents, `tau_dot_k = (d - (d.tau_k) tau_k) / q_k`
/// with `d = delta v_k`.
pub fn tangent_rates(g: &CurveGeometry, v: &PeriodicGridFunction) -> Vec<Vec2> {
    let dv = backward_difference(v);
    (0..g.len())
        .map(|k| {
            let d = dv[k];
            let t = g.tau[k];
            (d - t * d.dot(t)) * (1.0 / g.q[k])
        })
        .collect()
}

/// Time derivatives of the vertex tangents `theta = s/|s|`, `s = tau_k + tau_{k+1}`.
pub fn vertex_tangent_rates(g: &CurveGeometry, v: &PeriodicGridFunction) -> Result<Vec<Vec2>> {
    let tau_dot = tangent_rates(g, v);
    (0..g.len())
        .map(|k| {
            let theta = g.theta_at(k)?;
            let kn = g.next(k);
            let s = (g.tau[k] + g.tau[kn]).norm();
            let sd = tau_dot[k] + tau_dot[kn];
            Ok((sd - theta * sd.dot(theta)) * (1.0 / s))
        })
        .collect()
}

/// Length-element rates `q_dot_k = delta v_k . tau_k`.
pub fn length_element_rates(g: &CurveGeometry, v: &PeriodicGridFunction) -> Vec<f64> {
    let dv = backward_difference(v);
    (0..g.len()).map(|k| dv[k].dot(g.tau[k])).collect()
}

/// Right-hand side of the semidiscrete system: returns `(v, a)` with
/// `a_k = kappa_k - (v_k . theta_dot_k) theta_k - beta v_k`.
pub fn semidiscrete_rhs(
    s: &SemidiscreteState,
    beta: f64,
) -> Result<(PeriodicGridFunction, PeriodicGridFunction)> {
    let g = compute_geometry(&s.x)?;
    let acc = acceleration(&g, &s.v, beta)?;
    Ok((s.v.clone(), acc))
}

fn acceleration(g: &CurveGeometry, v: &PeriodicGridFunction, beta: f64) -> Result<PeriodicGridFunction> {
    let kappa = discrete_curvature_vector(g);
    let theta_dot = vertex_tangent_rates(g, v)?;
    let acc = (0..g.len())
        .map(|k| {
            let theta = g.theta_at(k)?;
            Ok(kappa[k] - theta * v[k].dot(theta_dot[k]) - v[k] * beta)
        })
        .collect::<Result<Vec<_>>>()?;
    PeriodicGridFunction::new(acc)
}

/// Semidiscrete initial velocity `V0 theta_k^perp`.
pub fn normal_initial_velocity(x0: &PeriodicGridFunction, v0: f64) -> Result<PeriodicGridFunction> {
    let g = compute_geometry(x0)?;
    PeriodicGridFunction::new(g.thetas()?.into_iter().map(|t| t.perp() * v0).collect())
}

fn pack(x: &PeriodicGridFunction, v: &PeriodicGridFunction) -> Vec<f64> {
    let mut y = Vec::with_capacity(4 * x.len());
    for p in x.values().iter().chain(v.values()) {
        y.push(p.x);
        y.push(p.y);
    }
    y
}

fn unpack(y: &[f64], j: usize) -> Result<(PeriodicGridFunction, PeriodicGridFunction)> {
    let pts: Vec<Vec2> = y.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
    let (xs, vs) = pts.split_at(j);
    Ok((PeriodicGridFunction::new(xs.to_vec())?, PeriodicGridFunction::new(vs.to_vec())?))
}

/// Integrates from `(x0, v0)` at `t = 0` and returns the states at each time
/// in `sample_times` (ascending, within `[0, t_end]`), plus the final state.
pub fn integrate_semidiscrete(
    x0: &PeriodicGridFunction,
    v0: &PeriodicGridFunction,
    beta: f64,
    t_end: f64,
    tol: f64,
    sample_times: &[f64],
) -> Result<Vec<SemidiscreteState>> {
    let j = x0.len();
    if v0.len() != j {
        return Err(Error::InvalidParams("position/velocity grid mismatch".into()));
    }
    compute_geometry(x0)?.thetas()?;
    let mut out = Vec::with_capacity(sample_times.len() + 1);
    let stops: Vec<f64> = sample_times.iter().copied().filter(|&t| t > 0.0 && t <= t_end).collect();
    let want_zero = sample_times.contains(&0.0);
    let mut pending_err: Option<Error> = None;

    let dp = DormandPrince::new(tol);
    let fin = dp.integrate(
        |_, y, dy| {
            let (x, v) = unpack(y, j)?;
            let g = compute_geometry(&x)?;
            let a = acceleration(&g, &v, beta)?;
            dy.copy_from_slice(&pack(&v, &a));
            Ok(())
        },
        0.0,
        pack(x0, v0),
        t_end,
        &stops,
        |t, y| {
            if (t == 0.0 && want_zero) || (t > 0.0 && stops.contains(&t) && t != t_end) {
                match unpack(y, j) {
                    Ok((x, v)) => out.push(SemidiscreteState { x, v, t }),
                    Err(e) => {
                        pending_err = Some(e);
                        return Control::Stop;
                    }
                }
            }
            Control::Continue
        },
    )?;
    if let Some(e) = pending_err {
        return Err(e);
    }
    let (x, v) = unpack(&fin.y, j)?;
    out.push(SemidiscreteState { x, v, t: fin.t });
    Ok(out)
}

/// Normality defect `max_k |v_k . theta_k|`.
pub fn normality_defect(s: &SemidiscreteState) -> Result<f64> {
    let g = compute_geometry(&s.x)?;
    let th = g.thetas()?;
    Ok((0..g.len()).map(|k| s.v[k].dot(th[k]).abs()).fold(0.0, f64::max))
}

/// `max_k |q_dot_k + (q_{k-1}+q_k)/4 (v.a + beta|v|^2)_{k-1} + (q_k+q_{k+1})/4 (v.a + beta|v|^2)_k|`
/// with `a` from the semidiscrete right-hand side.
pub fn length_identity_defect(s: &SemidiscreteState, beta: f64) -> Result<f64> {
    let g = compute_geometry(&s.x)?;
    let a = acceleration(&g, &s.v, beta)?;
    let qdot = length_element_rates(&g, &s.v);
    let power: Vec<f64> = (0..g.len())
        .map(|k| g.vertex_q(k) * (s.v[k].dot(a[k]) + beta * s.v[k].norm_sq()))
        .collect();
    Ok((0..g.len())
        .map(|k| (qdot[k] + 0.5 * power[g.prev(k)] + 0.5 * power[k]).abs())
        .fold(0.0, f64::max))
}
