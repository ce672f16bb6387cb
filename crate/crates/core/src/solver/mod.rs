//! Time stepping: the two-step scheme, its linear algebra, and the
//! semidiscrete reference integrator.

pub mod cyclic;
pub mod scheme;
pub mod semidiscrete;

pub use cyclic::{solve_cyclic_tridiagonal, CyclicTridiagonal, CyclicTridiagonalSystem};
pub use scheme::{
    assemble_step_system, init_states, init_states_from_grid, run, step, RunOutcome, SolverState,
    Termination,
};
pub use semidiscrete::{integrate_semidiscrete, semidiscrete_rhs, SemidiscreteState};
