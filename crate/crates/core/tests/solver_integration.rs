//! End-to-end behaviour of the two-step scheme.

use hypercurve::diagnostics::record_step;
use hypercurve::error::{BlowUpReason, Error};
use hypercurve::grid::{PeriodicGridFunction, Vec2};
use hypercurve::model::{FlowParams, InitialCurveSpec};
use hypercurve::solver::semidiscrete::normal_initial_velocity;
use hypercurve::solver::{init_states, init_states_from_grid, integrate_semidiscrete, run, Termination};

const ELLIPSE: InitialCurveSpec = InitialCurveSpec::Ellipse { a: 1.5, b: 1.0 };

fn final_level(spec: &InitialCurveSpec, p: &FlowParams) -> PeriodicGridFunction {
    let out = run(init_states(spec, p).unwrap(), |_| {});
    assert_eq!(out.termination, Termination::ReachedT);
    out.last.x_curr
}

/// Observed orders in `dt` against the time-exact semidiscrete solution.
fn temporal_orders(spec: InitialCurveSpec, v0: f64, beta: f64) -> Vec<f64> {
    let (j, t_end) = (32, 0.4);
    let x0 = spec.sample(j).unwrap();
    let v = normal_initial_velocity(&x0, v0).unwrap();
    let exact = integrate_semidiscrete(&x0, &v, beta, t_end, 1e-12, &[]).unwrap().pop().unwrap().x;
    let gaps: Vec<f64> = [4e-3, 2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&dt| {
            let p = FlowParams::new(beta, v0, j, dt, t_end).unwrap();
            final_level(&spec, &p).zip_with(&exact, |a, b| a - b).max_abs()
        })
        .collect();
    gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn homothetic_flow_is_second_order_in_time() {
    let spec = InitialCurveSpec::PerturbedCircle { r0: 1.0, eps: 0.1 };
    for order in temporal_orders(spec, 0.0, 0.0) {
        assert!((1.85..=2.15).contains(&order), "order {order}");
    }
}

/// The tangential-acceleration term is built from the backward-difference
/// velocity, which lags by half a step; once that term is nonzero the time
/// error is first order.
#[test]
fn non_homothetic_flow_is_first_order_in_time() {
    for (v0, beta) in [(0.0, 0.0), (1.0, 0.5)] {
        let orders = temporal_orders(ELLIPSE, v0, beta);
        let last = *orders.last().unwrap();
        assert!((0.85..=1.3).contains(&last), "v0={v0} beta={beta}: orders {orders:?}");
    }
}

#[test]
fn damped_energy_does_not_grow() {
    let p = FlowParams::new(1.0, 1.0, 128, 1e-3, 1.0).unwrap();
    let mut energies = Vec::new();
    let out = run(init_states(&ELLIPSE, &p).unwrap(), |s| energies.push(record_step(s).unwrap().energy));
    assert_eq!(out.termination, Termination::ReachedT);
    // skip the start-up level, whose backward velocity comes from the Taylor level
    let worst = energies[1..].windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
    assert!(worst <= 1e-6 * energies[1], "largest energy increase {worst:e}");
    assert!(energies.last().unwrap() < &energies[1]);
}

#[test]
fn scheme_commutes_with_rotation() {
    let angle = 0.7;
    let p = FlowParams::new(0.3, 0.5, 64, 1e-3, 0.5).unwrap();
    let x0 = ELLIPSE.sample(64).unwrap();
    let a = run(init_states_from_grid(x0.clone(), &p).unwrap(), |_| {}).last.x_curr;
    let b = run(init_states_from_grid(x0.rotate(angle), &p).unwrap(), |_| {}).last.x_curr;
    let gap = a.rotate(angle).zip_with(&b, |u, v| u - v).max_abs();
    assert!(gap <= 1e-12, "rotation gap {gap:e}");
}

#[test]
fn ellipse_keeps_its_mirror_symmetry() {
    let j = 64;
    let p = FlowParams::new(0.0, 1.0, j, 1e-3, 0.8).unwrap();
    let x = final_level(&ELLIPSE, &p);
    let mirror = |v: Vec2| Vec2::new(v.x, -v.y);
    let gap = (0..j).map(|k| (x[k] - mirror(x[(j - k) % j])).norm()).fold(0.0, f64::max);
    assert!(gap <= 1e-12, "symmetry defect {gap:e}");
}

#[test]
fn runs_are_bitwise_deterministic() {
    let p = FlowParams::new(0.1, 1.0, 96, 1e-3, 0.3).unwrap();
    let spec = InitialCurveSpec::dumbbell();
    let a = final_level(&spec, &p);
    let b = final_level(&spec, &p);
    assert!(a.values().iter().zip(b.values()).all(|(u, v)| u.x.to_bits() == v.x.to_bits()
        && u.y.to_bits() == v.y.to_bits()));
}

fn trip_reason(spec: &InitialCurveSpec, p: FlowParams) -> (BlowUpReason, f64) {
    let out = run(init_states(spec, &p).unwrap(), |_| {});
    match out.termination {
        Termination::Aborted(Error::BlowUpDetected { reason, t }) => {
            assert_eq!(out.abort_time, Some(t));
            assert_eq!(t, (out.last.m + 1) as f64 * p.dt);
            (reason, t)
        }
        other => panic!("expected a threshold trip, got {other:?}"),
    }
}

#[test]
fn each_threshold_reports_its_own_reason() {
    let base = FlowParams::new(0.0, 0.0, 64, 1e-3, 1.0).unwrap();
    let circle = InitialCurveSpec::Circle { r0: 1.0 };

    let mut p = base;
    p.stop.k_cap = 1.5;
    let (reason, t) = trip_reason(&circle, p);
    assert_eq!(reason, BlowUpReason::CurvatureCap);
    // the radius passes 2/3 shortly before t = 0.8
    assert!((0.7..0.85).contains(&t), "tripped at {t}");

    let mut p = base;
    p.stop.length_floor = 0.95;
    assert_eq!(trip_reason(&circle, p).0, BlowUpReason::LengthFloor);

    let mut p = base;
    p.stop.min_q_ratio = 0.999;
    assert_eq!(trip_reason(&ELLIPSE, p).0, BlowUpReason::MinLengthElement);
}

#[test]
fn collapsing_circle_trips_before_extinction() {
    let p = FlowParams::new(0.0, -1.0, 128, 1e-4, 1.0).unwrap();
    let (reason, t) = trip_reason(&InitialCurveSpec::Circle { r0: 1.0 }, p);
    assert_eq!(reason, BlowUpReason::CurvatureCap);
    assert!(t < 0.7, "tripped at {t}");
}
