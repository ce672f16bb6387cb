//! Periodic grid functions on the unit circle `I = R/Z` and the discrete
//! geometry of closed polygons built from them.
//!
//! Storage is 0-based: `values[k]` lives at `rho_k = k h`, so vertex `J` of
//! the usual 1-based convention aliases `values[0]`. Backward differences
//! wrap, `delta v_0 = (v_0 - v_{J-1}) / h`.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Smallest grid count accepted anywhere in the crate.
pub const MIN_POINTS: usize = 4;

/// `|tau_j + tau_{j+1}|` below this marks `theta_j` undefined.
pub const THETA_MIN: f64 = 1e-8;

/// Relative floor on length elements: `q_j <= Q_FLOOR_REL * length` is a collapse.
pub const Q_FLOOR_REL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Clockwise rotation through a right angle, `(x, y) -> (y, -x)`.
    ///
    /// For a counterclockwise curve this maps the tangent to the outward normal.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

/// `J` planar values on the uniform periodic grid with spacing `h = 1/J`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGridFunction {
    values: Vec<Vec2>,
}

impl PeriodicGridFunction {
    pub fn new(values: Vec<Vec2>) -> Result<Self> {
        if values.len() < MIN_POINTS {
            return Err(Error::InvalidParams(format!(
                "grid needs at least {MIN_POINTS} points, got {}",
                values.len()
            )));
        }
        Ok(PeriodicGridFunction { values })
    }

    pub fn zeros(j: usize) -> Result<Self> {
        Self::new(vec![Vec2::ZERO; j])
    }

    /// Samples `f(rho_k)` at `rho_k = k / J`, `k = 0..J`.
    pub fn sample(j: usize, mut f: impl FnMut(f64) -> Vec2) -> Result<Self> {
        let h = 1.0 / j as f64;
        Self::new((0..j).map(|k| f(k as f64 * h)).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    #[inline]
    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec2> {
        self.values
    }

    /// Value at an arbitrary (possibly negative) index, wrapped periodically.
    #[inline]
    pub fn at(&self, k: isize) -> Vec2 {
        let n = self.values.len() as isize;
        self.values[k.rem_euclid(n) as usize]
    }

    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        PeriodicGridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(Vec2, Vec2) -> Vec2) -> Self {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        PeriodicGridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn translate(&self, c: Vec2) -> Self {
        self.map(|v| v + c)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn rotate(&self, angle: f64) -> Self {
        self.map(|v| v.rotate(angle))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for PeriodicGridFunction {
    type Output = Vec2;
    #[inline]
    fn index(&self, k: usize) -> &Vec2 {
        &self.values[k]
    }
}

/// `(delta v)_k = (v_k - v_{k-1}) / h` with periodic wrap.
pub fn backward_difference(v: &PeriodicGridFunction) -> PeriodicGridFunction {
    let n = v.len();
    let inv_h = n as f64;
    let values = (0..n)
        .map(|k| (v.values[k] - v.values[(k + n - 1) % n]) * inv_h)
        .collect();
    PeriodicGridFunction { values }
}

/// Discrete L2 norm `(h sum |v_k|^2)^(1/2)`.
pub fn norm_0h(v: &PeriodicGridFunction) -> f64 {
    (v.h() * v.values.iter().map(|w| w.norm_sq()).sum::<f64>()).sqrt()
}

/// Discrete H1 norm `(h sum |v_k|^2 + |delta v_k|^2)^(1/2)`.
pub fn norm_1h(v: &PeriodicGridFunction) -> f64 {
    let dv = backward_difference(v);
    let s: f64 = v
        .values
        .iter()
        .zip(&dv.values)
        .map(|(a, b)| a.norm_sq() + b.norm_sq())
        .sum();
    (v.h() * s).sqrt()
}

/// Length elements, segment tangents and averaged vertex tangents of a polygon.
///
/// `q[k]` and `tau[k]` belong to the segment from vertex `k-1` to vertex `k`;
/// `theta[k]` belongs to vertex `k` and averages `tau[k]` and `tau[k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGeometry {
    pub q: Vec<f64>,
    pub tau: Vec<Vec2>,
    pub theta: Vec<Option<Vec2>>,
}

impl CurveGeometry {
    #[inline]
    pub fn len(&self) -> usize {
        self.q.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.q.len() as f64
    }

    /// Index of `k + 1` modulo `J`.
    #[inline]
    pub fn next(&self, k: usize) -> usize {
        if k + 1 == self.q.len() {
            0
        } else {
            k + 1
        }
    }

    /// Index of `k - 1` modulo `J`.
    #[inline]
    pub fn prev(&self, k: usize) -> usize {
        if k == 0 {
            self.q.len() - 1
        } else {
            k - 1
        }
    }

    /// `theta[k]`, or `HairpinSingularity` if undefined.
    #[inline]
    pub fn theta_at(&self, k: usize) -> Result<Vec2> {
        self.theta[k].ok_or(Error::HairpinSingularity { j: k })
    }

    /// All vertex tangents, failing on the first undefined one.
    pub fn thetas(&self) -> Result<Vec<Vec2>> {
        (0..self.len()).map(|k| self.theta_at(k)).collect()
    }

    /// Vertex mass `(q_k + q_{k+1}) / 2`.
    #[inline]
    pub fn vertex_q(&self, k: usize) -> f64 {
        0.5 * (self.q[k] + self.q[self.next(k)])
    }

    pub fn min_q(&self) -> f64 {
        self.q.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_q(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.q.len() as f64
    }
}

pub fn compute_geometry(x: &PeriodicGridFunction) -> Result<CurveGeometry> {
    let dx = backward_difference(x);
    let q: Vec<f64> = dx.values.iter().map(|d| d.norm()).collect();
    let length = x.h() * q.iter().sum::<f64>();
    let floor = Q_FLOOR_REL * length;
    if let Some(j) = q.iter().position(|&qk| !(qk > floor)) {
        return Err(Error::DegenerateSegment { j, q: q[j] });
    }
    let tau: Vec<Vec2> = dx
        .values
        .iter()
        .zip(&q)
        .map(|(&d, &qk)| d * (1.0 / qk))
        .collect();
    let n = tau.len();
    let theta = (0..n)
        .map(|k| {
            let s = tau[k] + tau[(k + 1) % n];
            let len = s.norm();
            if len < THETA_MIN {
                return None;
            }
            // For unit tangents s is orthogonal to d = tau_{k+1} - tau_k, so
            // at sharp corners (|d| > |s|) the direction of d^perp gives the
            // same theta while keeping d . theta = 0 exact in floating point.
            let d = tau[(k + 1) % n] - tau[k];
            let dn = d.norm();
            if dn > len {
                let p = d.perp() * (1.0 / dn);
                Some(if p.dot(s) >= 0.0 { p } else { -p })
            } else {
                Some(s * (1.0 / len))
            }
        })
        .collect();
    Ok(CurveGeometry { q, tau, theta })
}

/// `K_inf = max_k |delta tau_k| / q_k`, a proxy for the maximal curvature.
pub fn curvature_sup(g: &CurveGeometry) -> f64 {
    let n = g.len();
    let inv_h = n as f64;
    (0..n)
        .map(|k| (g.tau[k] - g.tau[g.prev(k)]).norm() * inv_h / g.q[k])
        .fold(0.0, f64::max)
}

/// `h sum q_k`, the perimeter of the polygon.
pub fn polygon_length(g: &CurveGeometry) -> f64 {
    g.h() * g.q.iter().sum::<f64>()
}

/// Discrete kinetic plus surface energy `1/2 h sum (q_k + q_{k+1})/2 (|v_k|^2 + 2)`.
pub fn discrete_energy(g: &CurveGeometry, v: &PeriodicGridFunction) -> f64 {
    assert_eq!(g.len(), v.len(), "grid size mismatch");
    let s: f64 = (0..g.len())
        .map(|k| g.vertex_q(k) * (v.values[k].norm_sq() + 2.0))
        .sum();
    0.5 * g.h() * s
}

/// Signed area of the polygon (positive for counterclockwise orientation).
pub fn signed_area(x: &PeriodicGridFunction) -> f64 {
    let n = x.len();
    0.5 * (0..n)
        .map(|k| x.values[(k + n - 1) % n].cross(x.values[k]))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn circle(j: usize, r: f64) -> PeriodicGridFunction {
        PeriodicGridFunction::sample(j, |rho| {
            Vec2::new(r * (2.0 * PI * rho).cos(), r * (2.0 * PI * rho).sin())
        })
        .unwrap()
    }

    #[test]
    fn rejects_small_grids() {
        assert!(PeriodicGridFunction::zeros(3).is_err());
        assert!(PeriodicGridFunction::zeros(4).is_ok());
    }

    #[test]
    fn wrapped_indexing() {
        let v = PeriodicGridFunction::sample(5, |rho| Vec2::new(rho, 0.0)).unwrap();
        assert_eq!(v.at(-1), v[4]);
        assert_eq!(v.at(5), v[0]);
        assert_eq!(v.at(6), v[1]);
    }

    #[test]
    fn difference_of_constant_vanishes() {
        let v = PeriodicGridFunction::new(vec![Vec2::new(1.0, 0.0); 8]).unwrap();
        assert!(backward_difference(&v).values().iter().all(|d| *d == Vec2::ZERO));
    }

    #[test]
    fn difference_of_quarter_circle() {
        let v = circle(4, 1.0);
        // 1-based index 1 is 0-based index 1
        let d = backward_difference(&v)[1];
        assert!((d.x + 4.0).abs() < 1e-12 && (d.y - 4.0).abs() < 1e-12);
    }

    #[test]
    fn difference_of_alternating() {
        let v = PeriodicGridFunction::sample(4, |rho| {
            let k = (rho * 4.0).round() as i32;
            Vec2::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let d = backward_difference(&v);
        for k in 0..4 {
            let expect = if k % 2 == 0 { 8.0 } else { -8.0 };
            assert_eq!(d[k], Vec2::new(expect, 0.0));
        }
    }

    #[test]
    fn norms_of_constants() {
        let v = PeriodicGridFunction::new(vec![Vec2::new(1.0, 0.0); 13]).unwrap();
        assert!((norm_0h(&v) - 1.0).abs() < 1e-15);
        assert!((norm_1h(&v) - 1.0).abs() < 1e-15);
        let w = PeriodicGridFunction::new(vec![Vec2::new(3.0, 4.0); 8]).unwrap();
        assert!((norm_0h(&w) - 5.0).abs() < 1e-15);
        assert_eq!(norm_1h(&PeriodicGridFunction::zeros(8).unwrap()), 0.0);
        assert!((norm_0h(&circle(64, 1.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_1h_of_circle() {
        let j = 256;
        let h = 1.0 / j as f64;
        let chord = 2.0 * (PI * h).sin() / h;
        let expect = (1.0 + chord * chord).sqrt();
        assert!((norm_1h(&circle(j, 1.0)) - expect).abs() < 1e-12);
        assert!((expect - (1.0 + 4.0 * PI * PI).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn regular_polygon_geometry() {
        let j = 16;
        let h = 1.0 / j as f64;
        let g = compute_geometry(&circle(j, 1.0)).unwrap();
        let q = 2.0 * (PI * h).sin() / h;
        assert!((q - 6.2429).abs() < 1e-4);
        for k in 0..j {
            assert!((g.q[k] - q).abs() < 1e-12);
            let a = 2.0 * PI * k as f64 * h;
            let t = g.theta[k].unwrap();
            assert!((t - Vec2::new(-a.sin(), a.cos())).norm() < 1e-12);
        }
    }

    #[test]
    fn square_geometry() {
        let x = PeriodicGridFunction::new(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .unwrap();
        let g = compute_geometry(&x).unwrap();
        assert!(g.q.iter().all(|&q| (q - 8.0).abs() < 1e-14));
        assert_eq!(g.tau[1], Vec2::new(0.0, 1.0));
        assert_eq!(g.tau[2], Vec2::new(-1.0, 0.0));
        let t = g.theta[1].unwrap();
        assert!((t - Vec2::new(-1.0, 1.0) * (1.0 / SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn hairpin_marks_theta_undefined() {
        let x = PeriodicGridFunction::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(0.5, 1.0),
        ])
        .unwrap();
        let g = compute_geometry(&x).unwrap();
        // tau[1] = +x, tau[2] = -x
        assert!(g.theta[1].is_none());
        assert!(matches!(g.theta_at(1), Err(Error::HairpinSingularity { j: 1 })));
    }

    #[test]
    fn collapsed_segment_is_degenerate() {
        let mut pts = circle(8, 1.0).into_values();
        pts[3] = pts[2];
        let x = PeriodicGridFunction::new(pts).unwrap();
        assert!(matches!(compute_geometry(&x), Err(Error::DegenerateSegment { j: 3, .. })));
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        for &j in &[4usize, 16, 256] {
            let g = compute_geometry(&circle(j, 1.0)).unwrap();
            assert!((curvature_sup(&g) - 1.0).abs() < 1e-12, "J={j}");
            let g = compute_geometry(&circle(j, 2.5)).unwrap();
            assert!((curvature_sup(&g) - 0.4).abs() < 1e-12, "J={j}");
        }
    }

    #[test]
    fn lengths() {
        let g = compute_geometry(&circle(4, 1.0)).unwrap();
        assert!((polygon_length(&g) - 4.0 * SQRT_2).abs() < 1e-14);
        let j = 1024;
        let g = compute_geometry(&circle(j, 1.0)).unwrap();
        let exact = 2.0 * j as f64 * (PI / j as f64).sin();
        assert!((polygon_length(&g) - exact).abs() < 1e-12);
        assert!((polygon_length(&g) - 6.28316).abs() < 2e-5);
    }

    #[test]
    fn energy_reduces_to_length() {
        let x = circle(32, 1.0);
        let g = compute_geometry(&x).unwrap();
        let zero = PeriodicGridFunction::zeros(32).unwrap();
        let unit = PeriodicGridFunction::new(vec![Vec2::new(1.0, 0.0); 32]).unwrap();
        let len = polygon_length(&g);
        assert!((discrete_energy(&g, &zero) - len).abs() < 1e-13);
        assert!((discrete_energy(&g, &unit) - 1.5 * len).abs() < 1e-13);
    }

    #[test]
    fn counterclockwise_circle_has_positive_area() {
        let a = signed_area(&circle(64, 1.0));
        assert!(a > 3.0 && a < PI);
    }
}
