//! Helpers shared by the integration tests.
#![allow(dead_code)]

use hypercurve::grid::{PeriodicGridFunction, Vec2};
use hypercurve::solver::{assemble_step_system, run, CyclicTridiagonal, RunOutcome, SolverState};
use rand::Rng;

/// Dense Gaussian elimination with partial pivoting on the full `J x J`
/// matrix of a cyclic tridiagonal system.
pub fn dense_solve(m: &CyclicTridiagonal, rhs: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for k in 0..n {
        a[k][k] += m.diag[k];
        a[k][(k + n - 1) % n] += m.lower[k];
        a[k][(k + 1) % n] += m.upper[k];
        a[k][n] = rhs[k];
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}

/// Random cyclic system with `diag > |lower| + |upper|` in every row.
pub fn random_dominant(rng: &mut impl Rng, n: usize) -> (CyclicTridiagonal, Vec<f64>) {
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let diag = (0..n)
        .map(|k| lower[k].abs() + upper[k].abs() + rng.gen_range(0.01..2.0))
        .collect();
    let rhs = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    (CyclicTridiagonal { diag, lower, upper }, rhs)
}

/// Random star-shaped polygon with `j` vertices: increasing angles with
/// jitter and radii in `[0.5, 1.5]`, shifted and scaled at random.
pub fn random_polygon(rng: &mut impl Rng, j: usize) -> PeriodicGridFunction {
    let center = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    let scale = rng.gen_range(0.1..10.0);
    let values = (0..j)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k as f64 + rng.gen_range(-0.3..0.3)) / j as f64;
            let r = rng.gen_range(0.5..1.5);
            center + Vec2::new(phi.cos(), phi.sin()) * (r * scale)
        })
        .collect();
    PeriodicGridFunction::new(values).unwrap()
}

/// Whether the polygon turns both ways somewhere.
pub fn is_nonconvex(x: &PeriodicGridFunction) -> bool {
    let n = x.len() as isize;
    let turns: Vec<f64> = (0..n).map(|k| (x.at(k) - x.at(k - 1)).cross(x.at(k + 1) - x.at(k))).collect();
    turns.iter().any(|&c| c > 0.0) && turns.iter().any(|&c| c < 0.0)
}

/// Runs to the end while re-assembling every step's system and recording
/// the smallest diagonal-dominance margin seen.
pub fn run_with_dominance(state: SolverState, mut observer: impl FnMut(&SolverState)) -> (RunOutcome, f64) {
    let m_end = state.params.num_steps();
    let mut margin = f64::INFINITY;
    let outcome = run(state, |s| {
        if s.m < m_end {
            if let Ok(sys) = assemble_step_system(s) {
                margin = margin.min(sys.matrix.dominance_margin());
            }
        }
        observer(s);
    });
    (outcome, margin)
}
