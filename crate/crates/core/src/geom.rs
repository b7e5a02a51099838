//! Planar primitives shared by every module: points as `Complex64`, closed
//! polylines, and 2x2 real Jacobians.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

/// Reflection in the unit circle, `z -> 1/conj(z)`.
#[inline]
pub fn reflect(z: C64) -> C64 {
    z / z.norm_sqr()
}

/// Reduce an angle into `[0, 2pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Closest point on segment `[a, b]` to `p`, with the segment parameter in `[0, 1]`.
pub fn project_to_segment(p: C64, a: C64, b: C64) -> (C64, f64) {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let s = ((p - a) * d.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (a + d * s, s)
}

pub fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    (p - project_to_segment(p, a, b).0).norm()
}

/// Nearest point on a closed polyline: `(distance, segment index, point, segment parameter)`.
pub fn nearest_on_closed(points: &[C64], p: C64) -> (f64, usize, C64, f64) {
    let n = points.len();
    let mut best = (f64::INFINITY, 0, points[0], 0.0);
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let (q, s) = project_to_segment(p, a, b);
        let d = (p - q).norm();
        if d < best.0 {
            best = (d, i, q, s);
        }
    }
    best
}

pub fn distance_to_closed(points: &[C64], p: C64) -> f64 {
    let n = points.len();
    let mut best2 = f64::INFINITY;
    for i in 0..n {
        let (q, _) = project_to_segment(p, points[i], points[(i + 1) % n]);
        let d2 = (p - q).norm_sqr();
        if d2 < best2 {
            best2 = d2;
        }
    }
    best2.sqrt()
}

/// Winding number of a closed polyline about `p` by summed principal angle increments.
pub fn winding_closed(points: &[C64], p: C64) -> i64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - p;
        let b = points[(i + 1) % n] - p;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

/// Signed area of a closed polyline (positive for counter-clockwise).
pub fn signed_area(points: &[C64]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        s += a.re * b.im - a.im * b.re;
    }
    0.5 * s
}

pub fn bounding_box(points: &[C64]) -> (C64, C64) {
    let mut lo = c(f64::INFINITY, f64::INFINITY);
    let mut hi = c(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

fn orient(a: C64, b: C64, p: C64) -> f64 {
    let u = b - a;
    let v = p - a;
    u.re * v.im - u.im * v.re
}

/// Whether closed segments `[a, b]` and `[p, q]` come within `tol` of each other.
pub fn segments_intersect(a: C64, b: C64, p: C64, q: C64, tol: f64) -> bool {
    let d1 = orient(a, b, p);
    let d2 = orient(a, b, q);
    let d3 = orient(p, q, a);
    let d4 = orient(p, q, b);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let gap = segment_distance(p, a, b)
        .min(segment_distance(q, a, b))
        .min(segment_distance(a, p, q))
        .min(segment_distance(b, p, q));
    gap <= tol
}

/// 2x2 real matrix acting on `(re, im)` column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Matrix of `h -> w h` for complex `w`.
    pub fn from_holomorphic(w: C64) -> Self {
        Self::new(w.re, -w.im, w.im, w.re)
    }

    /// Matrix of `h -> w conj(h)`.
    pub fn from_antiholomorphic(w: C64) -> Self {
        Self::new(w.re, w.im, w.im, -w.re)
    }

    /// Matrix of `h -> p h + q conj(h)` given Wirtinger derivatives `p = dF/dz`, `q = dF/dzbar`.
    pub fn from_wirtinger(p: C64, q: C64) -> Self {
        let m = Self::from_holomorphic(p);
        let n = Self::from_antiholomorphic(q);
        Self::new(m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, v: C64) -> C64 {
        c(self.a * v.re + self.b * v.im, self.c * v.re + self.d * v.im)
    }

    pub fn inverse(&self) -> Option<Jacobian2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Jacobian2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Singular values `(largest, smallest)`.
    pub fn singular_values(&self) -> (f64, f64) {
        // Via the Wirtinger decomposition: sigma = |p| +- |q|.
        let p = c((self.a + self.d) / 2.0, (self.c - self.b) / 2.0);
        let q = c((self.a - self.d) / 2.0, (self.c + self.b) / 2.0);
        let (np, nq) = (p.norm(), q.norm());
        (np + nq, (np - nq).abs())
    }

    /// Operator norm `||M||`.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    /// `||M^{-1}||`, the reciprocal of the smallest singular value.
    pub fn inverse_norm(&self) -> f64 {
        let s = self.singular_values().1;
        if s == 0.0 {
            f64::INFINITY
        } else {
            1.0 / s
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}
