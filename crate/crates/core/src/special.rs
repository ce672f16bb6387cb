//! Gauss error function.
//!
//! `erf` uses the all-positive series `erf z = 2/sqrt(pi) e^{-z^2} sum (2z^2)^n z / (2n+1)!!`
//! for small arguments and the Laplace continued fraction for `erfc` beyond
//! [`SERIES_CUTOFF`]. Both are accurate to a few ulp in absolute terms.

use std::f64::consts::PI;

const SERIES_CUTOFF: f64 = 2.5;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn erf_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        term *= 2.0 * z2 / (2.0 * n + 3.0);
        sum += term;
        n += 1.0;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-z2).exp() * sum
}

/// `erfc z` for `z >= SERIES_CUTOFF`, modified Lentz evaluation of
/// `e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`.
fn erfc_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

pub fn erf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let a = z.abs();
    let v = if a < SERIES_CUTOFF {
        erf_series(a)
    } else if a > 6.0 {
        1.0
    } else {
        1.0 - erfc_continued_fraction(a)
    };
    v.copysign(z)
}

pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z < SERIES_CUTOFF {
        1.0 - erf_series(z)
    } else if z > 27.0 {
        0.0
    } else {
        erfc_continued_fraction(z)
    }
}
