//! Numerical Riemann maps by the geodesic zipper algorithm, for the bounded
//! and the unbounded complementary domain of a sampled Jordan curve.

use serde::{Deserialize, Serialize};

use crate::ba_ext::{lift, CircleHomeoLift};
use crate::curves::{self, point_set_dist, set_diam, set_dist, CircleEmbedding, PlanarSet};
use crate::error::{Error, Result};
use crate::geom::{self, unit, wrap_angle, Jacobian2, C64, PI, TAU};
use crate::harmonic::{gamma_arcs, gamma_arcs_exterior, Arc};
use crate::report::CheckReport;

/// Radius beyond which disk evaluation blends into the boundary table.
pub const BLEND_RADIUS: f64 = 1.0 - 5e-4;
/// Relative tolerance of the boundary correspondence projection.
pub const CORRESPONDENCE_TOL: f64 = 1e-4;

// Side of the slit base on which the domain lies (positively oriented curves).
const BASE_SIDE: f64 = -1.0;

/// The root of `s` in the closed upper half-plane; real roots take the sign of `hint`.
fn upper_root(s: C64, hint: f64) -> C64 {
    let r = s.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re * hint < 0.0) {
        -r
    } else {
        r
    }
}

/// One geodesic slit map on the extended real line.
fn slit_real(x: f64, c: f64, b: f64) -> f64 {
    let t = if x.is_infinite() {
        if c == 0.0 {
            return x;
        }
        -1.0 / c
    } else {
        let den = 1.0 - c * x;
        if den == 0.0 {
            return f64::INFINITY;
        }
        x / den
    };
    if t == 0.0 {
        BASE_SIDE * b
    } else {
        t.signum() * t.hypot(b)
    }
}

fn slit_forward(z: C64, c: f64, b: f64) -> (C64, C64) {
    let den = C64::new(1.0, 0.0) - z * c;
    let t = z / den;
    let f = upper_root(t * t + b * b, t.re);
    (f, t / (den * den * f))
}

fn slit_inverse(u: C64, c: f64, b: f64) -> (C64, C64) {
    let zt = upper_root(u * u - b * b, u.re);
    let den = C64::new(1.0, 0.0) + zt * c;
    (zt / den, u / (zt * den * den))
}

/// Composition of elementary maps taking a Jordan domain onto the unit disk.
///
/// Forward direction (domain to disk): a square-root map opening the first
/// boundary arc, one geodesic slit map per further node, a Möbius map sending
/// the first node to infinity, squaring, and a Cayley map onto the disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zipper {
    z0: C64,
    z1: C64,
    k: C64,
    /// `(c, b, s)` per slit step; `s` rescales the next node to unit modulus.
    steps: Vec<[f64; 3]>,
    /// Image of the first node before the Möbius step (may be infinite).
    zeta0: f64,
    sigma: f64,
    q: C64,
    alpha: f64,
    /// Unwrapped prevertex angle of every node, starting at `alpha`.
    prevertices: Vec<f64>,
}

impl Zipper {
    /// Zip the closed polyline `pts` (positively oriented) around the interior point `p`.
    pub fn build(pts: &[C64], p: C64) -> Result<Self> {
        let n = pts.len();
        if n < 3 {
            return Err(Error::InvalidInput("zipper needs at least 3 nodes".into()));
        }
        let (z0, z1, z2) = (pts[0], pts[1], pts[2]);
        let k = (z2 - z0) / (z2 - z1);
        let mut zip = Zipper {
            z0,
            z1,
            k,
            steps: Vec::with_capacity(n - 2),
            zeta0: f64::INFINITY,
            sigma: 1.0,
            q: C64::new(0.0, 1.0),
            alpha: 0.0,
            prevertices: Vec::new(),
        };
        let mut img: Vec<C64> = pts.iter().map(|&z| zip.open(z).0).collect();
        let mut q = zip.open(p).0;
        let mut reals = vec![0.0; n];
        for kk in 2..n {
            let mut a = img[kk];
            if a.im < 0.0 {
                a = a.conj();
            }
            if !(a.im > 0.0) || !a.im.is_finite() {
                return Err(Error::NonConvergence(format!("zipper node {kk} reached the real axis early ({a})")));
            }
            let cc = a.re / a.norm_sqr();
            let b = a.norm_sqr() / a.im;
            let sc = if kk + 1 < n { slit_forward(img[kk + 1], cc, b).0.norm() } else { 1.0 };
            if !(sc > 0.0) || !sc.is_finite() {
                return Err(Error::NonConvergence(format!("zipper node {} collapsed", kk + 1)));
            }
            zip.steps.push([cc, b, sc]);
            for x in reals.iter_mut().take(kk).skip(1) {
                *x = slit_real(*x, cc, b) / sc;
            }
            reals[kk] = 0.0;
            for z in img.iter_mut().skip(kk + 1) {
                *z = slit_forward(*z, cc, b).0 / sc;
            }
            q = slit_forward(q, cc, b).0 / sc;
            zip.zeta0 = slit_real(zip.zeta0, cc, b) / sc;
        }
        let qm = zip.moebius(q).0;
        if qm.re == 0.0 || !qm.re.is_finite() {
            return Err(Error::NonConvergence("interior point landed on the last boundary arc".into()));
        }
        zip.sigma = qm.re.signum();
        zip.q = qm * qm * zip.sigma;
        if !(zip.q.im > 0.0) {
            return Err(Error::NonConvergence(format!("interior point image {} not in the upper half-plane", zip.q)));
        }
        let d = zip.forward(p).1;
        zip.alpha = -d.arg();

        let mut angles = Vec::with_capacity(n);
        angles.push(zip.alpha);
        let mut total = 0.0;
        let mut prev = zip.alpha;
        for (idx, &x) in reals.iter().enumerate().skip(1) {
            let xm = if zip.zeta0.is_infinite() { x } else { x / (1.0 - x / zip.zeta0) };
            let t = if xm.is_finite() {
                let u = zip.sigma * xm * xm;
                (unit(zip.alpha) * (u - zip.q) / (u - zip.q.conj())).arg()
            } else {
                zip.alpha
            };
            let step = (t - prev).rem_euclid(TAU);
            if !(step > 0.0) {
                return Err(Error::BoundaryCorrespondence(format!(
                    "prevertices are not strictly increasing at node {idx} of {n} (x = {x:e})"
                )));
            }
            total += step;
            prev = t;
            angles.push(angles.last().unwrap() + step);
        }
        total += (zip.alpha - prev).rem_euclid(TAU);
        if (total - TAU).abs() > 1e-8 {
            return Err(Error::BoundaryCorrespondence(format!("prevertices wind {total} instead of 2pi")));
        }
        zip.prevertices = angles;
        Ok(zip)
    }

    fn open(&self, z: C64) -> (C64, C64) {
        let dz = z - self.z0;
        let m = self.k * (z - self.z1) / dz;
        let w = C64::i() * m.sqrt();
        let dm = self.k * (self.z1 - self.z0) / (dz * dz);
        (w, -dm / (w * 2.0))
    }

    fn moebius(&self, u: C64) -> (C64, C64) {
        if self.zeta0.is_infinite() {
            return (u, C64::new(1.0, 0.0));
        }
        let den = C64::new(1.0, 0.0) - u / self.zeta0;
        (u / den, (den * den).inv())
    }

    /// Domain point to disk point, with the complex derivative.
    pub fn forward(&self, z: C64) -> (C64, C64) {
        let (mut u, mut d) = self.open(z);
        for s in &self.steps {
            let (v, dv) = slit_forward(u, s[0], s[1]);
            u = v / s[2];
            d *= dv / s[2];
        }
        let (v, dv) = self.moebius(u);
        d *= dv;
        let u = v * v * self.sigma;
        d *= v * 2.0 * self.sigma;
        let rot = unit(self.alpha);
        let den = u - self.q.conj();
        (rot * (u - self.q) / den, d * rot * (self.q - self.q.conj()) / (den * den))
    }

    /// Disk point to domain point, with the complex derivative.
    pub fn inverse(&self, w: C64) -> (C64, C64) {
        let v = w * unit(-self.alpha);
        let one = C64::new(1.0, 0.0);
        let mut u = (self.q - self.q.conj() * v) / (one - v);
        let mut d = unit(-self.alpha) * (self.q - self.q.conj()) / ((one - v) * (one - v));
        let s = if self.sigma > 0.0 { u.sqrt() } else { -(-u).sqrt() };
        d /= s * 2.0 * self.sigma;
        u = s;
        if self.zeta0.is_finite() {
            let den = one + u / self.zeta0;
            d /= den * den;
            u /= den;
        }
        for st in self.steps.iter().rev() {
            let (z, dz) = slit_inverse(u * st[2], st[0], st[1]);
            u = z;
            d *= dz * st[2];
        }
        let s = -C64::i() * u;
        let m = s * s;
        let den = m - self.k;
        let z = (m * self.z0 - self.k * self.z1) / den;
        d *= self.k * (self.z1 - self.z0) / (den * den) * s * 2.0 * (-C64::i());
        (z, d)
    }

    pub fn prevertices(&self) -> &[f64] {
        &self.prevertices
    }
}

/// Riemann map of the unit disk onto a zipped domain, with the boundary
/// table used for evaluation close to the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DiskMap {
    zipper: Zipper,
    symmetric: bool,
    /// `(t, point)` sorted by `t` in `[0, 2pi)`.
    table: Vec<(f64, C64)>,
    /// Radius beyond which values blend into the boundary polyline.
    #[serde(default = "default_blend")]
    blend: f64,
}

fn default_blend() -> f64 {
    BLEND_RADIUS
}

/// Widest blend band, as a fraction of the radius.
const MAX_BLEND_WIDTH: f64 = 0.25;

impl DiskMap {
    fn core(&self, z: C64) -> (C64, C64) {
        if self.symmetric {
            let (a, da) = self.zipper.inverse(z);
            let (b, db) = self.zipper.inverse(-z);
            ((a - b) / 2.0, (da + db) / 2.0)
        } else {
            self.zipper.inverse(z)
        }
    }

    /// Value and Jacobian, blending near the circle into `edge(theta) = (value, d value / d theta)`.
    fn eval(&self, z: C64, edge: impl Fn(f64) -> (C64, C64)) -> (C64, Jacobian2) {
        let r = z.norm();
        let rb = self.blend;
        if r <= rb {
            let (v, d) = self.core(z);
            return (v, Jacobian2::from_holomorphic(d));
        }
        let theta = z.arg();
        let e = unit(theta);
        let (a, da) = self.core(e * rb);
        let (b, db) = edge(theta);
        let lam = ((r - rb) / (1.0 - rb)).min(1.0);
        let dlam = 1.0 / (1.0 - rb);
        let v = a * (1.0 - lam) + b * lam;
        let dr = (b - a) * dlam;
        let dtheta = da * C64::i() * e * rb * (1.0 - lam) + db * lam;
        let (ct, st) = (theta.cos(), theta.sin());
        let dx = dr * ct - dtheta * (st / r);
        let dy = dr * st + dtheta * (ct / r);
        (v, Jacobian2::new(dx.re, dy.re, dx.im, dy.im))
    }

    fn derivative(&self, z: C64) -> C64 {
        self.core(z).1
    }

    /// Widen the blend band until the gap between the boundary values of the
    /// map and the edge, measured in disk units, is a quarter of the band.
    fn fit_blend(&mut self, edge: impl Fn(f64) -> (C64, C64)) {
        let n = self.table.len();
        let mut worst = 0.0f64;
        for k in 0..n {
            let ta = self.table[k].0;
            let tb = if k + 1 < n { self.table[k + 1].0 } else { self.table[0].0 + TAU };
            let t = 0.5 * (ta + tb);
            let (a, da) = self.core(unit(t) * (1.0 - 1e-9));
            worst = worst.max((edge(t).0 - a).norm() / da.norm());
        }
        let width = (4.0 * worst).clamp(1.0 - BLEND_RADIUS, MAX_BLEND_WIDTH);
        self.blend = 1.0 - width;
    }

    /// Domain point to disk point.
    fn inverse(&self, w: C64) -> C64 {
        let mut z = self.zipper.forward(w).0;
        if self.symmetric {
            for _ in 0..8 {
                let (v, d) = self.core(z);
                let step = (v - w) / d;
                z -= step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
        }
        z
    }
}

/// Piecewise-linear interpolation of a periodic table, with `d point / dt`.
fn table_lerp(table: &[(f64, C64)], t: f64) -> (C64, C64) {
    let n = table.len();
    let t0 = table[0].0;
    let s = t0 + (t - t0).rem_euclid(TAU);
    let k = match table.partition_point(|e| e.0 <= s) {
        0 => n - 1,
        i => i - 1,
    };
    let (ta, a) = table[k];
    let (tb, b) = if k + 1 < n { table[k + 1] } else { (table[0].0 + TAU, table[0].1) };
    let slope = (b - a) / (tb - ta);
    (a + slope * (s - ta), slope)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Interior,
    Exterior,
}

/// Numerical Riemann map: `D -> Omega` with `Phi(0) = 0`, `Phi'(0) > 0`, or
/// `C \ closed D -> Omega_e` with `Phi(z) = c z + O(1)`, `c > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalMap {
    kind: MapKind,
    disk: DiskMap,
    /// Inversion centre of the exterior map (zero for interior maps).
    center: C64,
    rotation: f64,
    /// Induced boundary map `(t, phi(e^{it}))`, sorted by `t` in `[0, 2pi)`.
    table: Vec<(f64, C64)>,
    capacity: Option<f64>,
}

fn zipper_nodes(points: &[C64], resolution: usize) -> Vec<C64> {
    let n = points.len();
    let mut out = Vec::with_capacity(n * resolution);
    for k in 0..n {
        let (a, b) = (points[k], points[(k + 1) % n]);
        for j in 0..resolution {
            out.push(a + (b - a) * (j as f64 / resolution as f64));
        }
    }
    out
}

fn check_spacing(points: &[C64], diam: f64) -> Result<()> {
    let n = points.len();
    for k in 0..n {
        if (points[(k + 1) % n] - points[k]).norm() <= 1e-12 * diam {
            return Err(Error::InvalidInput(format!("numerically coincident nodes at index {k}")));
        }
    }
    Ok(())
}

/// Start at the node nearest the interior point, which keeps prevertex crowding lowest.
fn zipper_start(points: &[C64]) -> usize {
    let mut best = 0;
    for (k, p) in points.iter().enumerate() {
        if p.norm() < points[best].norm() {
            best = k;
        }
    }
    best
}

/// Disk map for a positively oriented polyline around `0`, with table
/// entries at the polyline vertices.
fn disk_map(points: &[C64], symmetric: bool, resolution: usize) -> Result<DiskMap> {
    let resolution = resolution.max(1);
    let diam = curves::brute_diam(points);
    check_spacing(points, diam)?;
    let n = points.len();
    let start = zipper_start(points);
    let rolled: Vec<C64> = (0..n).map(|k| points[(k + start) % n]).collect();
    let zip_pts = zipper_nodes(&rolled, resolution);
    let zipper = Zipper::build(&zip_pts, C64::new(0.0, 0.0))?;
    let pre = zipper.prevertices();
    let mut ts: Vec<f64> = (0..n)
        .map(|k| {
            let j = (k + n - start) % n;
            // keep the unwrapped order starting at node 0
            if j * resolution >= (n - start) % n * resolution { pre[j * resolution] - TAU } else { pre[j * resolution] }
        })
        .collect();
    if symmetric {
        if n % 2 != 0 {
            return Err(Error::Symmetry("symmetric polyline needs an even node count".into()));
        }
        let h = n / 2;
        for k in 0..h {
            let avg = 0.5 * (ts[k] + ts[k + h] - PI);
            ts[k] = avg;
            ts[k + h] = avg + PI;
        }
    }
    let mut table: Vec<(f64, C64)> = ts.iter().zip(points).map(|(t, p)| (wrap_angle(*t), *p)).collect();
    table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(DiskMap { zipper, symmetric, table, blend: BLEND_RADIUS })
}

/// Riemann map `D -> Omega` for the bounded domain, which must contain `0`.
pub fn interior_map(curve: &CircleEmbedding, resolution: usize) -> Result<ConformalMap> {
    let w = curves::winding_number(curve, C64::new(0.0, 0.0))?;
    if w != 1 {
        return Err(Error::Domain(format!("curve does not contain 0 (winding number {w})")));
    }
    let disk = disk_map(curve.points(), curve.is_symmetric(), resolution)?;
    let table = disk.table.clone();
    let map = ConformalMap { kind: MapKind::Interior, disk, center: C64::new(0.0, 0.0), rotation: 0.0, table, capacity: None };
    Ok(map.with_fitted_blend())
}

/// Riemann map `C \ closed D -> Omega_e` fixing infinity, via inversion about an interior point.
pub fn exterior_map(curve: &CircleEmbedding, resolution: usize) -> Result<ConformalMap> {
    let origin = C64::new(0.0, 0.0);
    let center = if geom::distance_to_closed(curve.points(), origin) > 1e-10 * curve.diam()
        && curves::winding_number(curve, origin)? == 1
    {
        origin
    } else {
        curves::incenter(curve, curves::INCENTER_GRID)?.center
    };
    let n = curve.len();
    // Inversion reverses orientation, so reverse the node order too.
    let inv: Vec<C64> = (0..n).map(|j| (curve.points()[n - 1 - j] - center).inv()).collect();
    let symmetric = curve.is_symmetric() && center == origin;
    let disk = disk_map(&inv, symmetric, resolution)?;
    let capacity = 1.0 / disk.derivative(origin).re;
    let mut table: Vec<(f64, C64)> =
        disk.table.iter().map(|(t, u)| (wrap_angle(-t), center + u.inv())).collect();
    table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let map = ConformalMap { kind: MapKind::Exterior, disk, center, rotation: 0.0, table, capacity: Some(capacity) };
    Ok(map.with_fitted_blend())
}

impl ConformalMap {
    fn with_fitted_blend(mut self) -> Self {
        let mut disk = self.disk.clone();
        disk.fit_blend(|t| self.edge(t));
        self.disk = disk;
        self
    }

    /// Boundary value and its angle derivative in the frame of the disk map.
    fn edge(&self, t: f64) -> (C64, C64) {
        match self.kind {
            MapKind::Interior => table_lerp(&self.disk.table, t),
            MapKind::Exterior => {
                // The inverted polyline, not the polyline through the inverted nodes.
                let (p, dp) = table_lerp(&self.table, -t - self.rotation);
                let q = (p - self.center).inv();
                (q, dp * q * q)
            }
        }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Leading coefficient at infinity of an exterior map.
    pub fn capacity(&self) -> Option<f64> {
        self.capacity
    }

    pub fn boundary_table(&self) -> &[(f64, C64)] {
        &self.table
    }

    pub fn is_symmetric(&self) -> bool {
        self.disk.symmetric
    }

    /// The same map precomposed with the rotation `z -> e^{i alpha} z`.
    pub fn rotated(&self, alpha: f64) -> ConformalMap {
        let mut m = self.clone();
        m.rotation += alpha;
        let mut table: Vec<(f64, C64)> = self.table.iter().map(|(t, w)| (wrap_angle(t - alpha), *w)).collect();
        table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        m.table = table;
        m
    }

    fn check_domain(&self, z: C64) -> Result<()> {
        let r = z.norm();
        let ok = match self.kind {
            MapKind::Interior => r <= 1.0 + 1e-14,
            MapKind::Exterior => r >= 1.0 - 1e-14 && r.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {z} outside the closed {:?} domain", self.kind)))
        }
    }

    /// `Phi(z)` together with its real Jacobian (holomorphic away from the circle).
    pub fn eval_with_jacobian(&self, z: C64) -> Result<(C64, Jacobian2)> {
        self.check_domain(z)?;
        let rot = unit(self.rotation);
        match self.kind {
            MapKind::Interior => {
                let (v, j) = self.disk.eval(z * rot, |t| self.edge(t));
                Ok((v, j.mul(&Jacobian2::from_holomorphic(rot))))
            }
            MapKind::Exterior => {
                let x = (z * rot).inv();
                let (u, j) = self.disk.eval(x, |t| self.edge(t));
                let outer = Jacobian2::from_holomorphic(-(u * u).inv());
                let inner = Jacobian2::from_holomorphic(-(x * x) * rot);
                Ok((self.center + u.inv(), outer.mul(&j).mul(&inner)))
            }
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.eval_with_jacobian(z)?.0)
    }

    /// `Phi(z)` from the zipper composition alone, without the boundary blend (open domain only).
    pub fn eval_conformal(&self, z: C64) -> Result<C64> {
        let r = z.norm();
        let rot = unit(self.rotation);
        match self.kind {
            MapKind::Interior if r < 1.0 => Ok(self.disk.core(z * rot).0),
            MapKind::Exterior if r > 1.0 && r.is_finite() => Ok(self.center + self.disk.core((z * rot).inv()).0.inv()),
            _ => Err(Error::Domain(format!("conformal value needs an open-domain point, got {z}"))),
        }
    }

    /// Boundary of the conformal image, at least `per_interval` samples between
    /// consecutive table angles and no angular gap above `2 pi / 4096`, taken
    /// just inside the unit circle of the zipper frame.
    pub fn conformal_boundary(&self, per_interval: usize) -> Vec<C64> {
        let table = &self.disk.table;
        let n = table.len();
        let mut out = Vec::with_capacity(n * per_interval);
        for k in 0..n {
            let ta = table[k].0;
            let tb = if k + 1 < n { table[k + 1].0 } else { table[0].0 + TAU };
            let m = per_interval.max(((tb - ta) / (TAU / 4096.0)).ceil() as usize);
            for j in 0..m {
                let t = ta + (tb - ta) * j as f64 / m as f64;
                let u = self.disk.core(unit(t) * (1.0 - 1e-9)).0;
                out.push(match self.kind {
                    MapKind::Interior => u,
                    MapKind::Exterior => self.center + u.inv(),
                });
            }
        }
        out
    }

    /// Complex derivative `Phi'(z)` from the zipper composition (open domain only).
    pub fn derivative(&self, z: C64) -> Result<C64> {
        let r = z.norm();
        let rot = unit(self.rotation);
        match self.kind {
            MapKind::Interior if r < 1.0 => Ok(self.disk.derivative(z * rot) * rot),
            MapKind::Exterior if r > 1.0 && r.is_finite() => {
                let x = (z * rot).inv();
                let (u, d) = self.disk.core(x);
                Ok(d * x * x * rot / (u * u))
            }
            _ => Err(Error::Domain(format!("derivative needs an open-domain point, got {z}"))),
        }
    }

    /// `Phi^{-1}(w)` for `w` in the mapped domain.
    pub fn inverse(&self, w: C64) -> Result<C64> {
        let rot = unit(-self.rotation);
        match self.kind {
            MapKind::Interior => Ok(self.disk.inverse(w) * rot),
            MapKind::Exterior => {
                let d = w - self.center;
                if d.norm() == 0.0 {
                    return Err(Error::Domain("inversion centre is not in the exterior domain".into()));
                }
                Ok(self.disk.inverse(d.inv()).inv() * rot)
            }
        }
    }

    /// Induced boundary map `phi(e^{it})` by table interpolation.
    pub fn boundary_point(&self, t: f64) -> C64 {
        table_lerp(&self.table, t).0
    }

    /// Image of a circle arc under the boundary map, sampled with `m + 1` points plus table nodes.
    pub fn boundary_image(&self, arc: &Arc, m: usize) -> PlanarSet {
        let mut pts: Vec<C64> = arc.angles(m).into_iter().map(|t| self.boundary_point(t)).collect();
        for (t, w) in &self.table {
            if arc.contains(*t) {
                pts.push(*w);
            }
        }
        PlanarSet(pts)
    }

    /// JSON dump sufficient to rebuild the evaluator bit for bit.
    pub fn dump(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_dump(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Lift of `psi = f^{-1} o phi` from the boundary table of `map`.
pub fn boundary_homeo(map: &ConformalMap, curve: &CircleEmbedding) -> Result<CircleHomeoLift> {
    let tol = CORRESPONDENCE_TOL * curve.diam();
    let mut samples = Vec::with_capacity(map.table.len());
    for (t, w) in &map.table {
        let (s, d) = curve.project(*w);
        if d > tol {
            return Err(Error::BoundaryCorrespondence(format!(
                "table point {w} is {d:e} from the curve (tolerance {tol:e})"
            )));
        }
        samples.push((*t, unit(s)));
    }
    let l = lift(&samples)?;
    if curve.is_symmetric() && map.is_symmetric() && !l.is_pi_equivariant() {
        return Err(Error::Symmetry(format!(
            "boundary homeomorphism of a symmetric curve is not pi-equivariant (defect {:e})",
            l.check_equivariance()
        )));
    }
    Ok(l)
}

/// `(max |f|, dist(0, f(T)))`: radii with `B(0, inner) in Omega in B(0, outer)`.
pub fn radial_bounds(curve: &CircleEmbedding) -> (f64, f64) {
    let outer = curve.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
    (outer, geom::distance_to_closed(curve.points(), C64::new(0.0, 0.0)))
}

const ARC_SAMPLES: usize = 256;

fn images(map: &ConformalMap, arcs: &[Arc; 4]) -> Vec<PlanarSet> {
    arcs.iter().map(|a| map.boundary_image(a, ARC_SAMPLES)).collect()
}

/// Margins of the interior derivative estimates at `z`: the Koebe sandwich,
/// the growth-type distortion bounds with radii `(outer, inner)`, and the
/// arc-image bounds where `|z|` lies in their annuli. Distances are taken to
/// `boundary`, a sampling of the map's own boundary.
pub fn verify_interior_derivative_bounds(
    map: &ConformalMap,
    boundary: &[C64],
    z: C64,
    radii: (f64, f64),
) -> Result<Vec<CheckReport>> {
    if map.kind != MapKind::Interior {
        return Err(Error::InvalidInput("interior bounds need an interior map".into()));
    }
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::Domain(format!("interior bounds need |z| < 1, got {r}")));
    }
    let d = map.derivative(z)?.norm();
    let zeta = map.eval_conformal(z)?;
    let rho = geom::distance_to_closed(boundary, zeta);
    let s = (1.0 - r * r) * d;
    let (outer, inner) = radii;
    let mut out = vec![
        CheckReport::le("Koebe", rho, s),
        CheckReport::le("Koebe", s, 4.0 * rho),
        CheckReport::le("Koebedist1", inner * (1.0 - r) / (1.0 + r).powi(3), d),
        CheckReport::le("Koebedist1", d, outer * (1.0 + r) / (1.0 - r).powi(3)),
    ];
    if r > 0.0 && r > (-TAU).exp() {
        let delta = -r.ln();
        let g = images(map, &gamma_arcs(z)?);
        if r > (-PI / 4.0).exp() {
            out.push(CheckReport::le("confderest1", set_dist(&g[0], &g[3]) / (60000.0 * delta), d));
        }
        out.push(CheckReport::le("confderest2", d, 2e6 * set_diam(&g[1]).min(set_diam(&g[2])) / delta));
    }
    Ok(out)
}

/// Margins of the exterior estimates at `|z| > 1`: capacity against diameter,
/// the normalized distortion sandwich, and the derivative bounds by distance
/// to the boundary and by arc images.
pub fn verify_exterior_derivative_bounds(
    map: &ConformalMap,
    curve: &CircleEmbedding,
    boundary: &[C64],
    z: C64,
) -> Result<Vec<CheckReport>> {
    let cap = map
        .capacity
        .ok_or_else(|| Error::InvalidInput("exterior bounds need an exterior map".into()))?;
    let big_r = z.norm();
    if !(big_r > 1.0) {
        return Err(Error::Domain(format!("exterior bounds need |z| > 1, got {big_r}")));
    }
    let diam = curve.diam();
    let d = map.derivative(z)?.norm();
    let zeta = map.eval_conformal(z)?;
    let rho = geom::distance_to_closed(boundary, zeta);
    let log_r = big_r.ln();
    let inv2 = 1.0 - 1.0 / (big_r * big_r);
    let mut out = vec![
        CheckReport::le("capdiam", 2.0 * cap, diam),
        CheckReport::le("capdiam", diam, 4.0 * cap),
        CheckReport::le("Sigmadist", inv2, d / cap),
        CheckReport::le("Sigmadist", d / cap, 1.0 / inv2),
        CheckReport::le("derdistext2", d, 4.0 * rho / log_r),
    ];
    if big_r < (PI / 4.0).exp() {
        out.push(CheckReport::le("derdistext1", rho / (5.0 * log_r), d));
    }
    let g = if big_r < TAU.exp() { Some(images(map, &gamma_arcs_exterior(z)?)) } else { None };
    if big_r < (PI / 4.0).exp() {
        let g = g.as_ref().unwrap();
        out.push(CheckReport::le("extderest1", set_dist(&g[0], &g[3]) / (600000.0 * log_r), d));
    } else {
        out.push(CheckReport::le("extderest1", diam / 6.0, d));
    }
    match &g {
        Some(g) => {
            out.push(CheckReport::le("extderest2", d, 5e9 * set_diam(&g[1]).min(set_diam(&g[2])) / log_r));
            out.push(CheckReport::le("distdiam", point_set_dist(zeta, &g[1]), big_r * diam));
        }
        None => {
            out.push(CheckReport::le("extderest2", d, diam));
            let all = PlanarSet(curve.points().to_vec());
            out.push(CheckReport::le("distdiam", point_set_dist(zeta, &all), big_r * diam));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{circle, ellipse, make_embedding, CurveSpec, Family};
    use crate::geom::c;

    fn grid(rmax: f64) -> Vec<C64> {
        let mut g = Vec::new();
        for i in 1..=9 {
            for j in 0..24 {
                g.push(C64::from_polar(rmax * i as f64 / 9.0, TAU * j as f64 / 24.0 + 0.1));
            }
        }
        g
    }

    #[test]
    fn circle_map_is_identity() {
        let cv = circle(c(0.0, 0.0), 1.0, 64).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        for z in grid(0.9) {
            assert!((m.eval(z).unwrap() - z).norm() < 1e-8, "{z}");
            assert!((m.derivative(z).unwrap() - 1.0).norm() < 1e-7);
        }
        for (t, w) in m.boundary_table() {
            assert!((unit(*t) - w).norm() < 1e-8);
        }
    }

    #[test]
    fn scaled_circle_map_is_scaling() {
        let r = 3.5;
        let cv = circle(c(0.0, 0.0), r, 128).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        for z in grid(0.9) {
            assert!((m.eval(z).unwrap() - z * r).norm() < 1e-8 * r);
        }
        let e = exterior_map(&cv, 1).unwrap();
        assert!((e.capacity().unwrap() - r).abs() < 1e-8 * r);
        for z in grid(0.9) {
            let zz = z / z.norm() * (1.1 + 1.0 / z.norm());
            assert!((e.eval(zz).unwrap() - zz * r).norm() < 1e-8 * r, "{zz}");
        }
    }

    #[test]
    fn not_containing_origin_is_rejected() {
        let cv = circle(c(3.0, 0.0), 1.0, 64).unwrap();
        assert!(interior_map(&cv, 1).is_err());
        assert!(exterior_map(&cv, 1).is_ok());
    }

    #[test]
    fn ellipse_map_properties() {
        let cv = ellipse(2.0, 1.0, 512).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        let d0 = m.derivative(c(0.0, 0.0)).unwrap();
        assert!(d0.im.abs() < 1e-12 && d0.re >= 1.0 && d0.re <= 2.0, "{d0}");
        assert!(m.eval(c(0.0, 0.0)).unwrap().norm() < 1e-12);
        let ts: Vec<f64> = m.boundary_table().iter().map(|e| e.0).collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        for z in grid(0.95) {
            let w = m.eval(z).unwrap();
            assert!((m.inverse(w).unwrap() - z).norm() < 1e-6, "{z}");
            assert!((m.eval(-z).unwrap() + w).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let cv = ellipse(2.0, 1.0, 256).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        let e = exterior_map(&cv, 1).unwrap();
        for z in grid(0.9) {
            let h = 1e-5;
            let fd = (m.eval(z + h).unwrap() - m.eval(z - h).unwrap()) / (2.0 * h);
            let d = m.derivative(z).unwrap();
            assert!((fd - d).norm() < 1e-6 * d.norm(), "{z}: {fd} vs {d}");
            let zz = z / z.norm() * (1.1 + 1.0 / z.norm());
            let h = 1e-5 * zz.norm();
            let fd = (e.eval(zz + h).unwrap() - e.eval(zz - h).unwrap()) / (2.0 * h);
            let d = e.derivative(zz).unwrap();
            assert!((fd - d).norm() < 1e-6 * d.norm(), "{zz}: {fd} vs {d}");
        }
    }

    #[test]
    fn blend_jacobian_matches_finite_differences() {
        let cv = ellipse(2.0, 1.0, 128).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        let z = C64::from_polar(1.0 - 4e-4, 0.77);
        let (_, j) = m.eval_with_jacobian(z).unwrap();
        let h = 1e-8;
        let dx = (m.eval(z + h).unwrap() - m.eval(z - h).unwrap()) / (2.0 * h);
        let dy = (m.eval(z + c(0.0, h)).unwrap() - m.eval(z - c(0.0, h)).unwrap()) / (2.0 * h);
        let s = j.norm();
        assert!((j.a - dx.re).abs() < 1e-5 * s && (j.c - dx.im).abs() < 1e-5 * s);
        assert!((j.b - dy.re).abs() < 1e-5 * s && (j.d - dy.im).abs() < 1e-5 * s);
    }

    #[test]
    fn thin_ellipse_capacity() {
        let cv = ellipse(2.0, 0.01, 2048).unwrap();
        let e = exterior_map(&cv, 1).unwrap();
        let cap = e.capacity().unwrap();
        // z + 1/z maps the exterior of the disk onto the exterior of [-2, 2].
        assert!((cap - 1.0).abs() < 0.02, "{cap}");
    }

    #[test]
    fn square_capacity() {
        let spec = CurveSpec::Family {
            family: Family::Polygon { vertices: vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]] },
            n: 512,
        };
        let cv = make_embedding(&spec).unwrap();
        let cap = exterior_map(&cv, 1).unwrap().capacity().unwrap();
        // Gamma(1/4)^2 / (4 pi^{3/2}) for the unit square
        let exact = 3.625_609_908_221_908_f64.powi(2) / (4.0 * PI.powf(1.5));
        assert!((cap - exact).abs() < 0.01 * exact, "{cap} vs {exact}");
        let fine = exterior_map(&cv, 2).unwrap().capacity().unwrap();
        assert!((cap - fine).abs() < 0.01 * exact);
    }

    #[test]
    fn boundary_homeo_identity_and_rotation() {
        let cv = circle(c(0.0, 0.0), 1.0, 64).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        let l = boundary_homeo(&m, &cv).unwrap();
        for k in 0..50 {
            let t = 0.12 * k as f64;
            assert!((l.eval(t) - t).abs() < 1e-8);
        }
        let alpha = 0.3;
        let l = boundary_homeo(&m.rotated(alpha), &cv).unwrap();
        for k in 0..50 {
            let t = 0.12 * k as f64;
            assert!((l.eval(t) - t - alpha).abs() < 1e-8);
        }
    }

    #[test]
    fn boundary_homeo_of_ellipse_is_equivariant() {
        let cv = ellipse(2.0, 1.0, 256).unwrap();
        for m in [interior_map(&cv, 1).unwrap(), exterior_map(&cv, 1).unwrap()] {
            let l = boundary_homeo(&m, &cv).unwrap();
            assert!(l.check_equivariance() < 1e-6);
            assert!(l.is_pi_equivariant());
        }
    }

    #[test]
    fn dump_roundtrip_is_exact() {
        let cv = ellipse(2.0, 1.0, 64).unwrap();
        let m = exterior_map(&cv, 1).unwrap();
        let back = ConformalMap::from_dump(&m.dump().unwrap()).unwrap();
        assert_eq!(m, back);
        let z = c(1.3, -0.4);
        assert_eq!(m.eval(z).unwrap(), back.eval(z).unwrap());
    }

    #[test]
    fn unit_circle_bound_arithmetic() {
        let cv = circle(c(0.0, 0.0), 1.0, 256).unwrap();
        let m = interior_map(&cv, 1).unwrap();
        let reps = verify_interior_derivative_bounds(&m, &m.conformal_boundary(4), c(0.9, 0.0), (1.0, 1.0)).unwrap();
        let koebe: Vec<_> = reps.iter().filter(|r| r.name == "Koebe").collect();
        assert!((koebe[0].rhs - 0.19).abs() < 1e-6 && (koebe[0].lhs - 0.1).abs() < 1e-3);
        assert!(reps.iter().all(|r| r.margin > 0.0));
        let e = exterior_map(&cv, 1).unwrap();
        let reps = verify_exterior_derivative_bounds(&e, &cv, &e.conformal_boundary(4), c(2.0, 0.0)).unwrap();
        let s: Vec<_> = reps.iter().filter(|r| r.name == "Sigmadist").collect();
        assert!((s[0].lhs - 0.75).abs() < 1e-9 && (s[1].rhs - 4.0 / 3.0).abs() < 1e-9);
        assert!(reps.iter().all(|r| r.margin > -1e-9), "{reps:?}");
    }
}
