//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with PI step control.
//!
//! Used for the reference trajectories (circle radius ODE, semidiscrete
//! system). Output is produced at accepted steps; requested output times are
//! hit exactly by shortening the step that would cross them.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks one from the tolerance and the time span.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl DormandPrince {
    pub fn new(tol: f64) -> Self {
        DormandPrince {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Final state of an integration.
#[derive(Debug, Clone)]
pub struct Finish {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// True when the observer asked to stop before `t_end`.
    pub stopped: bool,
}

fn error_norm(tol: &DormandPrince, y: &[f64], y_new: &[f64], err: &[f64]) -> f64 {
    let n = y.len() as f64;
    let s: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

impl DormandPrince {
    /// Integrates `y' = f(t, y)` from `t0` to `t_end`.
    ///
    /// `f` writes the derivative into its third argument and may fail; a
    /// failing stage is treated as a rejected step. `observer` is called at
    /// `t0` and after every accepted step. Every time in `stops` (ascending,
    /// inside `(t0, t_end]`) is landed on exactly.
    pub fn integrate<F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: Vec<f64>,
        t_end: f64,
        stops: &[f64],
        mut observer: O,
    ) -> Result<Finish>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        O: FnMut(f64, &[f64]) -> Control,
    {
        let n = y0.len();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut err = vec![0.0; n];

        f(t, &y, &mut k1)?;
        if observer(t, &y) == Control::Stop {
            return Ok(Finish { t, y, accepted: 0, rejected: 0, stopped: true });
        }

        let span = t_end - t0;
        if span <= 0.0 {
            return Ok(Finish { t, y, accepted: 0, rejected: 0, stopped: false });
        }
        let mut h = self
            .h_init
            .unwrap_or_else(|| span * self.rtol.max(1e-16).powf(0.2) * 0.1)
            .min(self.h_max);
        let h_min = 16.0 * f64::EPSILON * t_end.abs().max(1.0);

        let beta = 0.04;
        let alpha = 0.2 - 0.75 * beta;
        let mut err_prev: f64 = 1e-4;

        let mut stop_idx = stops.iter().position(|&s| s > t).unwrap_or(stops.len());
        let mut accepted = 0;
        let mut rejected = 0;

        while t < t_end {
            if accepted + rejected >= self.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            let target = stops.get(stop_idx).copied().unwrap_or(t_end).min(t_end);
            let mut landing = false;
            if t + h >= target - 1e-14 * target.abs().max(1.0) {
                h = target - t;
                landing = true;
            }
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t });
            }

            let stage_ok = (|| -> Result<()> {
                for i in 0..n {
                    tmp[i] = y[i] + h * A21 * k1[i];
                }
                f(t + C2 * h, &tmp, &mut k2)?;
                for i in 0..n {
                    tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
                }
                f(t + C3 * h, &tmp, &mut k3)?;
                for i in 0..n {
                    tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
                }
                f(t + C4 * h, &tmp, &mut k4)?;
                for i in 0..n {
                    tmp[i] =
                        y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
                }
                f(t + C5 * h, &tmp, &mut k5)?;
                for i in 0..n {
                    tmp[i] = y[i]
                        + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                            + A65 * k5[i]);
                }
                f(t + h, &tmp, &mut k6)?;
                for i in 0..n {
                    y_new[i] = y[i]
                        + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                            + A76 * k6[i]);
                }
                f(t + h, &y_new, &mut k7)?;
                Ok(())
            })();

            if stage_ok.is_err() {
                rejected += 1;
                h *= 0.25;
                continue;
            }

            for i in 0..n {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
            }
            let e = error_norm(self, &y, &y_new, &err);
            if !e.is_finite() {
                rejected += 1;
                h *= 0.25;
                continue;
            }

            if e <= 1.0 {
                t = if landing { target } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;
                if landing && stop_idx < stops.len() && target == stops[stop_idx] {
                    stop_idx += 1;
                }
                if observer(t, &y) == Control::Stop {
                    return Ok(Finish { t, y, accepted, rejected, stopped: true });
                }
                let e = e.max(1e-10);
                let fac = 0.9 * e.powf(-alpha) * err_prev.powf(beta);
                err_prev = e;
                h = (h * fac.clamp(0.2, 10.0)).min(self.h_max);
            } else {
                rejected += 1;
                let fac = 0.9 * e.powf(-alpha);
                h *= fac.clamp(0.2, 1.0);
            }
        }
        Ok(Finish { t, y, accepted, rejected, stopped: false })
    }
}
