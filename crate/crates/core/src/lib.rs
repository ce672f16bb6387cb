//! Finite-difference solver for hyperbolic curvature flow of closed planar
//! curves, `x_tt + beta x_t = kappa nu - (x_t . tau_t) tau`, which moves each
//! curve with normal acceleration equal to its curvature.
//!
//! The crate provides the linear two-step scheme, an adaptive semidiscrete
//! reference integrator, exact shrinking/expanding circle solutions and the
//! diagnostics needed for convergence studies and blow-up detection.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod model;
pub mod ode;
pub mod solver;
pub mod special;

pub use error::{BlowUpReason, Error, Result};
pub use grid::{CurveGeometry, PeriodicGridFunction, Vec2};
pub use model::{FlowParams, InitialCurveSpec, StopThresholds};
pub use solver::SolverState;
