//! The linear two-step scheme.
//!
//! Given `x^m` and `x^{m-1}`, each step solves, for every vertex `k`,
//!
//! ```text
//! M_k (x^{m+1} - 2x^m + x^{m-1}) / dt^2 + D_k (x^{m+1} - x^{m-1}) / dt
//!     = E(x^{m+1})_k + E(x^{m-1})_k - M_k ((x^m - x^{m-1})/dt . (th^m - th^{m-1})/dt) th^m_k
//! ```
//!
//! with `M_k = (q_k + q_{k+1}) h / 2`, `D_k = beta M_k / 2` and
//! `E(y)_k = (y_{k+1} - y_k) / (2 h q_{k+1}) - (y_k - y_{k-1}) / (2 h q_k)`,
//! all coefficients frozen at level `m`. The operator is the same for both
//! coordinates, so one factorization serves two solves.

use crate::error::{BlowUpReason, Error, Result};
use crate::grid::{
    compute_geometry, curvature_sup, polygon_length, CurveGeometry, PeriodicGridFunction, Vec2,
};
use crate::model::{FlowParams, InitialCurveSpec};

use super::cyclic::{CyclicTridiagonal, CyclicTridiagonalSystem};

/// `(x^m, x^{m-1})` plus the step counter: the complete state of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_curr: PeriodicGridFunction,
    pub x_prev: PeriodicGridFunction,
    pub m: usize,
    pub params: FlowParams,
    /// `|Gamma^0|`, reference for the length floor.
    pub initial_length: f64,
}

impl SolverState {
    pub fn t(&self) -> f64 {
        self.m as f64 * self.params.dt
    }

    /// Backward-difference velocity `(x^m - x^{m-1}) / dt`.
    pub fn velocity(&self) -> PeriodicGridFunction {
        let inv_dt = 1.0 / self.params.dt;
        self.x_curr.zip_with(&self.x_prev, |a, b| (a - b) * inv_dt)
    }

    /// Same state with both levels replaced, e.g. after a rigid motion.
    pub fn with_levels(&self, x_curr: PeriodicGridFunction, x_prev: PeriodicGridFunction) -> Self {
        SolverState { x_curr, x_prev, ..self.clone() }
    }
}

/// Discrete curvature vector `2/(q_k + q_{k+1}) (tau_{k+1} - tau_k)/h`.
pub fn discrete_curvature_vector(g: &CurveGeometry) -> Vec<Vec2> {
    let inv_h = g.len() as f64;
    (0..g.len())
        .map(|k| {
            let kn = g.next(k);
            (g.tau[kn] - g.tau[k]) * (2.0 * inv_h / (g.q[k] + g.q[kn]))
        })
        .collect()
}

/// Builds `x^0` from the initial curve and `x^{-1}` from a second-order
/// Taylor step backwards in time.
pub fn init_states(spec: &InitialCurveSpec, params: &FlowParams) -> Result<SolverState> {
    params.validate()?;
    let x0 = spec.sample(params.j)?;
    init_states_from_grid(x0, params)
}

pub fn init_states_from_grid(x0: PeriodicGridFunction, params: &FlowParams) -> Result<SolverState> {
    params.validate()?;
    if x0.len() != params.j {
        return Err(Error::InvalidParams(format!(
            "grid has {} points but J = {}",
            x0.len(),
            params.j
        )));
    }
    let g = compute_geometry(&x0)?;
    let dt = params.dt;
    let v0 = params.v0;
    let kappa = discrete_curvature_vector(&g);
    let normals: Vec<Vec2> = if v0 != 0.0 {
        g.thetas()?.into_iter().map(Vec2::perp).collect()
    } else {
        vec![Vec2::ZERO; g.len()]
    };
    let x_prev = (0..g.len())
        .map(|k| {
            let nu = normals[k];
            x0[k] - nu * (dt * v0) + (kappa[k] - nu * (params.beta * v0)) * (0.5 * dt * dt)
        })
        .collect();
    Ok(SolverState {
        x_prev: PeriodicGridFunction::new(x_prev)?,
        initial_length: polygon_length(&g),
        x_curr: x0,
        m: 0,
        params: *params,
    })
}

/// The shared matrix and the two right-hand sides of one step.
#[derive(Debug, Clone)]
pub struct StepSystem {
    pub matrix: CyclicTridiagonal,
    pub rhs_x: Vec<f64>,
    pub rhs_y: Vec<f64>,
    /// `min_k (M_k/dt^2 + D_k/dt)`, the guaranteed dominance margin.
    pub mass_margin: f64,
}

impl StepSystem {
    pub fn systems(&self) -> [CyclicTridiagonalSystem; 2] {
        [
            CyclicTridiagonalSystem { matrix: self.matrix.clone(), rhs: self.rhs_x.clone() },
            CyclicTridiagonalSystem { matrix: self.matrix.clone(), rhs: self.rhs_y.clone() },
        ]
    }
}

/// Elliptic part `E(y)_k` with coefficients `1/(2 h q)` frozen from `g`.
fn elliptic(g: &CurveGeometry, y: &PeriodicGridFunction) -> Vec<Vec2> {
    let n = g.len();
    let inv_2h = 0.5 * n as f64;
    (0..n)
        .map(|k| {
            let kn = g.next(k);
            let kp = g.prev(k);
            (y[kn] - y[k]) * (inv_2h / g.q[kn]) - (y[k] - y[kp]) * (inv_2h / g.q[k])
        })
        .collect()
}

/// The linear system `A x^{m+1} = b` of one step.
pub fn assemble_step_system(state: &SolverState) -> Result<StepSystem> {
    let g = compute_geometry(&state.x_curr)?;
    let g_prev = compute_geometry(&state.x_prev)?;
    assemble_with_geometry(state, &g, &g_prev, Unknown::Level)
}

/// What the assembled system solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unknown {
    /// The new level `x^{m+1}`.
    Level,
    /// The increment `x^{m+1} - x^m`. Same matrix, right-hand side
    /// `b - A x^m`, formed without the `1/dt^2`-sized cancellation, so
    /// rounding errors stay proportional to the increment.
    Increment,
}

fn assemble_with_geometry(
    state: &SolverState,
    g: &CurveGeometry,
    g_prev: &CurveGeometry,
    unknown: Unknown,
) -> Result<StepSystem> {
    let n = g.len();
    let h = g.h();
    let dt = state.params.dt;
    let beta = state.params.beta;
    let inv_dt2 = 1.0 / (dt * dt);
    let inv_2h = 0.5 / h;

    let theta = g.thetas()?;
    let theta_prev = g_prev.thetas()?;

    let mut diag = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs_x = vec![0.0; n];
    let mut rhs_y = vec![0.0; n];
    let mut mass_margin = f64::INFINITY;

    let x = &state.x_curr;
    let xp = &state.x_prev;
    let ell = match unknown {
        Unknown::Level => elliptic(g, xp),
        // 2 E(x^m) - E(x^m - x^{m-1})
        Unknown::Increment => elliptic(g, &x.zip_with(xp, |a, b| a + b)),
    };

    for k in 0..n {
        let kn = g.next(k);
        let mass = 0.5 * (g.q[k] + g.q[kn]) * h;
        let damping = 0.5 * beta * mass;
        let mass_diag = mass * inv_dt2 + damping / dt;
        mass_margin = mass_margin.min(mass_diag);

        lower[k] = -inv_2h / g.q[k];
        upper[k] = -inv_2h / g.q[kn];
        diag[k] = mass_diag + inv_2h / g.q[k] + inv_2h / g.q[kn];

        let w = (x[k] - xp[k]).dot(theta[k] - theta_prev[k]) * inv_dt2;
        let inertia = match unknown {
            Unknown::Level => (x[k] * 2.0 - xp[k]) * (mass * inv_dt2) + xp[k] * (damping / dt),
            Unknown::Increment => (x[k] - xp[k]) * (mass * inv_dt2 - damping / dt),
        };
        let r = inertia + ell[k] - theta[k] * (mass * w);
        rhs_x[k] = r.x;
        rhs_y[k] = r.y;
    }

    Ok(StepSystem {
        matrix: CyclicTridiagonal { diag, lower, upper },
        rhs_x,
        rhs_y,
        mass_margin,
    })
}

/// Checks the stopping thresholds on the geometry of a new level.
pub fn check_thresholds(g: &CurveGeometry, state: &SolverState, t: f64) -> Result<()> {
    let stop = &state.params.stop;
    let reason = if curvature_sup(g) > stop.k_cap {
        Some(BlowUpReason::CurvatureCap)
    } else if polygon_length(g) < stop.length_floor * state.initial_length {
        Some(BlowUpReason::LengthFloor)
    } else if g.min_q() < stop.min_q_ratio * g.mean_q() {
        Some(BlowUpReason::MinLengthElement)
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::BlowUpDetected { reason, t }),
        None => Ok(()),
    }
}

/// Advances the scheme by one step.
///
/// The returned state has `x_prev` equal to the input's `x_curr`. Fails with
/// `BlowUpDetected` when the new level trips a stopping threshold.
pub fn step(state: &SolverState) -> Result<SolverState> {
    let g = compute_geometry(&state.x_curr)?;
    let g_prev = compute_geometry(&state.x_prev)?;
    let sys = assemble_with_geometry(state, &g, &g_prev, Unknown::Increment)?;
    let margin = sys.matrix.dominance_margin();
    if !(margin > 0.0) {
        let row = (0..sys.matrix.len())
            .find(|&k| {
                !(sys.matrix.diag[k] > sys.matrix.lower[k].abs() + sys.matrix.upper[k].abs())
            })
            .unwrap_or(0);
        return Err(Error::NotDiagonallyDominant { row });
    }
    let fact = sys.matrix.factor()?;
    let (wx, wy) = rayon::join(|| fact.solve(&sys.rhs_x), || fact.solve(&sys.rhs_y));
    let x_next = PeriodicGridFunction::new(
        (0..wx.len()).map(|k| state.x_curr[k] + Vec2::new(wx[k], wy[k])).collect(),
    )?;

    let t_next = (state.m + 1) as f64 * state.params.dt;
    let g_next = compute_geometry(&x_next)?;
    check_thresholds(&g_next, state, t_next)?;

    Ok(SolverState {
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        m: state.m + 1,
        params: state.params,
        initial_length: state.initial_length,
    })
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedT,
    Aborted(Error),
}

impl Termination {
    pub fn reason_name(&self) -> &'static str {
        match self {
            Termination::ReachedT => "ReachedT",
            Termination::Aborted(Error::BlowUpDetected { .. }) => "BlowUpDetected",
            Termination::Aborted(Error::HairpinSingularity { .. }) => "HairpinSingularity",
            Termination::Aborted(_) => "DegenerateSegment",
        }
    }
}

/// Result of [`run`]: the last alive state and why stepping ended.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub last: SolverState,
    pub termination: Termination,
    /// Time at which the abort was detected (the attempted step), if any.
    pub abort_time: Option<f64>,
}

/// Steps from `state` to `M = T/dt`, calling `observer` on the initial state
/// and every accepted state. Solver errors end the run; they are reported in
/// the outcome rather than returned.
pub fn run(mut state: SolverState, mut observer: impl FnMut(&SolverState)) -> RunOutcome {
    let m_end = state.params.num_steps();
    observer(&state);
    while state.m < m_end {
        match step(&state) {
            Ok(next) => {
                state = next;
                observer(&state);
            }
            Err(e) => {
                let t = (state.m + 1) as f64 * state.params.dt;
                let abort_time = match &e {
                    Error::BlowUpDetected { t, .. } => *t,
                    _ => t,
                };
                return RunOutcome {
                    last: state,
                    termination: Termination::Aborted(e),
                    abort_time: Some(abort_time),
                };
            }
        }
    }
    RunOutcome { last: state, termination: Termination::ReachedT, abort_time: None }
}
