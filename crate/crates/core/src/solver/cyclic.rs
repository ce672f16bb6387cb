//! Cyclic tridiagonal systems: Thomas elimination with a Sherman–Morrison
//! rank-one correction for the two periodic corner entries.

use crate::error::{Error, Result};

/// Row `k` reads `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1]` with
/// indices taken modulo `J`, so `lower[0]` and `upper[J-1]` are the corners.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonalSystem {
    pub matrix: CyclicTridiagonal,
    pub rhs: Vec<f64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

impl CyclicTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Smallest `diag[k] - |lower[k]| - |upper[k]|` over all rows.
    pub fn dominance_margin(&self) -> f64 {
        (0..self.len())
            .map(|k| self.diag[k] - self.lower[k].abs() - self.upper[k].abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_dominance(&self) -> Result<()> {
        for k in 0..self.len() {
            if !(self.diag[k] > self.lower[k].abs() + self.upper[k].abs()) {
                return Err(Error::NotDiagonallyDominant { row: k });
            }
        }
        Ok(())
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                self.lower[k] * x[(k + n - 1) % n]
                    + self.diag[k] * x[k]
                    + self.upper[k] * x[(k + 1) % n]
            })
            .collect()
    }

    /// Factors the matrix once so several right-hand sides can share the work.
    pub fn factor(&self) -> Result<CyclicFactorization> {
        let n = self.len();
        if n < 3 || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidParams(format!(
                "cyclic system needs >= 3 rows with matching bands, got {n}"
            )));
        }
        self.check_dominance()?;

        let corner_top = self.lower[0]; // A[0][n-1]
        let corner_bottom = self.upper[n - 1]; // A[n-1][0]
        let gamma = -self.diag[0];

        // T' = A - u v^T with u = (gamma, 0.., corner_bottom), v = (1, 0.., corner_top/gamma)
        let mut d = self.diag.clone();
        d[0] -= gamma;
        d[n - 1] -= corner_bottom * corner_top / gamma;

        // Thomas forward sweep on T'
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = d[0];
        if denom[0].abs() < PIVOT_FLOOR {
            return Err(Error::SingularSystem { row: 0 });
        }
        c_prime[0] = self.upper[0] / denom[0];
        for k in 1..n {
            let m = d[k] - self.lower[k] * c_prime[k - 1];
            if m.abs() < PIVOT_FLOOR {
                return Err(Error::SingularSystem { row: k });
            }
            denom[k] = m;
            c_prime[k] = if k + 1 < n { self.upper[k] / m } else { 0.0 };
        }

        let mut fact = CyclicFactorization {
            lower: self.lower.clone(),
            c_prime,
            denom,
            z: Vec::new(),
            v_last: corner_top / gamma,
            correction_denom: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = corner_bottom;
        let z = fact.thomas(&u);
        let vz = z[0] + fact.v_last * z[n - 1];
        fact.correction_denom = 1.0 + vz;
        if fact.correction_denom.abs() < PIVOT_FLOOR {
            return Err(Error::SingularSystem { row: n - 1 });
        }
        fact.z = z;
        Ok(fact)
    }
}

#[derive(Debug, Clone)]
pub struct CyclicFactorization {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
    z: Vec<f64>,
    v_last: f64,
    correction_denom: f64,
}

impl CyclicFactorization {
    fn thomas(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.denom.len();
        let mut y = vec![0.0; n];
        y[0] = rhs[0] / self.denom[0];
        for k in 1..n {
            y[k] = (rhs[k] - self.lower[k] * y[k - 1]) / self.denom[k];
        }
        for k in (0..n - 1).rev() {
            y[k] -= self.c_prime[k] * y[k + 1];
        }
        y
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.denom.len();
        assert_eq!(rhs.len(), n, "rhs length mismatch");
        let mut y = self.thomas(rhs);
        let vy = y[0] + self.v_last * y[n - 1];
        let s = vy / self.correction_denom;
        for (yk, zk) in y.iter_mut().zip(&self.z) {
            *yk -= s * zk;
        }
        y
    }
}

pub fn solve_cyclic_tridiagonal(sys: &CyclicTridiagonalSystem) -> Result<Vec<f64>> {
    Ok(sys.matrix.factor()?.solve(&sys.rhs))
}
