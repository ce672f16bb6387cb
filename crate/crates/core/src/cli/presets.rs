//! Named experiment setups: the circle, ellipse and dumbbell runs and the
//! convergence benchmark.
//!
//! Final times are chosen past the expected blow-up so that the stopping
//! thresholds, not `T`, end the singular runs.

use super::config::RunConfig;
use crate::model::{InitialCurveSpec, StopThresholds};

/// Default resolution of the figure runs.
pub const DEFAULT_J: usize = 256;
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: RunConfig,
}

const ELLIPSE: InitialCurveSpec = InitialCurveSpec::Ellipse { a: 1.5, b: 1.0 };
const UNIT_CIRCLE: InitialCurveSpec = InitialCurveSpec::Circle { r0: 1.0 };

fn figure_run(curve: InitialCurveSpec, v0: f64, beta: f64, t_final: f64, snapshot_every: f64) -> RunConfig {
    RunConfig {
        curve,
        v0,
        beta,
        j: DEFAULT_J,
        dt: DEFAULT_DT,
        t_final,
        snapshot_stride: (snapshot_every / DEFAULT_DT).round() as usize,
        output_dir: None,
        stop: StopThresholds::default(),
        svg: true,
    }
}

/// The convergence benchmark at its coarsest level: the perturbed circle
/// with `dt = h` up to `T = 1`.
pub fn table1_config(j: usize) -> RunConfig {
    RunConfig {
        curve: InitialCurveSpec::PerturbedCircle { r0: 1.0, eps: 0.1 },
        v0: 0.0,
        beta: 0.0,
        j,
        dt: 1.0 / j as f64,
        t_final: 1.0,
        snapshot_stride: (j / 4).max(1),
        output_dir: None,
        stop: StopThresholds::default(),
        svg: true,
    }
}

pub fn presets() -> Vec<Preset> {
    let dumbbell = InitialCurveSpec::dumbbell();
    vec![
        Preset {
            name: "circle-v0",
            description: "unit circle at rest; shrinks to a point at sqrt(pi/2)",
            config: figure_run(UNIT_CIRCLE, 0.0, 0.0, 1.3, 0.1),
        },
        Preset {
            name: "circle-v+1",
            description: "unit circle with outward speed 1; expands to radius e^(1/2), then collapses",
            config: figure_run(UNIT_CIRCLE, 1.0, 0.0, 3.45, 0.3),
        },
        Preset {
            name: "circle-v-1",
            description: "unit circle with inward speed 1",
            config: figure_run(UNIT_CIRCLE, -1.0, 0.0, 0.65, 0.05),
        },
        Preset {
            name: "ellipse-v0",
            description: "3x2 ellipse at rest; curvature blows up near t = 1.47",
            config: figure_run(ELLIPSE, 0.0, 0.0, 1.6, 0.1),
        },
        Preset {
            name: "ellipse-v1",
            description: "3x2 ellipse with outward speed 1; blow-up near t = 4.2",
            config: figure_run(ELLIPSE, 1.0, 0.0, 4.5, 0.3),
        },
        Preset {
            name: "ellipse-v0-beta2",
            description: "3x2 ellipse at rest with damping beta = 2; blow-up near t = 2.44",
            config: figure_run(ELLIPSE, 0.0, 2.0, 2.6, 0.2),
        },
        Preset {
            name: "ellipse-v1-beta01",
            description: "3x2 ellipse with outward speed 1 and damping beta = 0.1; blow-up near t = 4.1",
            config: figure_run(ELLIPSE, 1.0, 0.1, 4.4, 0.3),
        },
        Preset {
            name: "dumbbell-v0",
            description: "nonconvex dumbbell at rest (qualitative)",
            config: figure_run(dumbbell, 0.0, 0.0, 1.5, 0.05),
        },
        Preset {
            name: "dumbbell-v1",
            description: "nonconvex dumbbell with outward speed 1 (qualitative)",
            config: figure_run(dumbbell, 1.0, 0.0, 6.0, 0.2),
        },
        Preset {
            name: "dumbbell-v-1",
            description: "nonconvex dumbbell with inward speed 1 (qualitative)",
            config: figure_run(dumbbell, -1.0, 0.0, 1.0, 0.03),
        },
        Preset {
            name: "table1",
            description: "perturbed circle with a known exact solution, dt = h, T = 1",
            config: table1_config(32),
        },
    ]
}

pub fn find_preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

pub fn preset_names() -> Vec<&'static str> {
    presets().iter().map(|p| p.name).collect()
}
