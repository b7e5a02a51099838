//! Harmonic measure: exact disk formulas, projection-theorem bounds and their
//! metric corollaries, and a walk-on-spheres estimator for polygonal domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{self, point_set_dist, set_diam, PlanarSet};
use crate::error::{Error, Result};
use crate::geom::{self, unit, C64, PI, TAU};
use crate::report::{CheckReport, Method};

/// Closed arc `{e^{it} : t_lo <= t <= t_hi}` of the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Arc {
    pub fn new(t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo < t_hi && t_hi - t_lo <= TAU) {
            return Err(Error::Domain(format!("invalid arc [{t_lo}, {t_hi}]")));
        }
        Ok(Self { t_lo, t_hi })
    }

    pub fn length(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    /// Image under `z -> conj(z)`.
    pub fn conjugate(&self) -> Arc {
        Arc { t_lo: -self.t_hi, t_hi: -self.t_lo }
    }

    pub fn rotated(&self, alpha: f64) -> Arc {
        Arc { t_lo: self.t_lo + alpha, t_hi: self.t_hi + alpha }
    }

    pub fn contains(&self, t: f64) -> bool {
        let s = self.t_lo + (t - self.t_lo).rem_euclid(TAU);
        s <= self.t_hi
    }

    /// `m + 1` equally spaced angles from `t_lo` to `t_hi`.
    pub fn angles(&self, m: usize) -> Vec<f64> {
        let m = m.max(1);
        (0..=m).map(|k| self.t_lo + self.length() * k as f64 / m as f64).collect()
    }

    pub fn sample(&self, m: usize) -> PlanarSet {
        PlanarSet(self.angles(m).into_iter().map(unit).collect())
    }
}

/// The four arcs attached to `z = r e^{i theta}` with `delta = log(1/r)`:
/// `[theta-2d, theta-d]`, `[theta-d, theta-d/2]`, `[theta+d/2, theta+d]`, `[theta+d, theta+2d]`.
pub fn gamma_arcs(z: C64) -> Result<[Arc; 4]> {
    let r = z.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("gamma arcs need 0 < |z| < 1, got |z| = {r}")));
    }
    Ok(arcs_for(z.arg(), (1.0 / r).ln()))
}

/// The same four arcs for an exterior point `z = R e^{i theta}`, `delta = log R`.
pub fn gamma_arcs_exterior(z: C64) -> Result<[Arc; 4]> {
    let r = z.norm();
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("exterior gamma arcs need |z| > 1, got {r}")));
    }
    Ok(arcs_for(z.arg(), r.ln()))
}

fn arcs_for(theta: f64, d: f64) -> [Arc; 4] {
    [
        Arc { t_lo: theta - 2.0 * d, t_hi: theta - d },
        Arc { t_lo: theta - d, t_hi: theta - d / 2.0 },
        Arc { t_lo: theta + d / 2.0, t_hi: theta + d },
        Arc { t_lo: theta + d, t_hi: theta + 2.0 * d },
    ]
}

/// Poisson kernel of the unit disk, `(1/2pi) (1 - |z|^2) / |zeta - z|^2`.
pub fn poisson_kernel(z: C64, zeta: C64) -> f64 {
    (1.0 - z.norm_sqr()) / ((zeta - z).norm_sqr() * TAU)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasureResult {
    pub value: f64,
    pub method: Method,
    pub std_error: f64,
    pub walks: u64,
    /// Walks that hit the step cap before absorption.
    pub unabsorbed: u64,
}

impl HarmonicMeasureResult {
    fn exact(value: f64) -> Self {
        Self { value: value.clamp(0.0, 1.0), method: Method::PoissonExact, std_error: 0.0, walks: 0, unabsorbed: 0 }
    }

    /// `value - 3 sigma`, the one-sided safe estimate used by the corollary checks.
    pub fn conservative(&self) -> f64 {
        self.value - 3.0 * self.std_error
    }
}

/// Absolute error target of the Poisson quadrature.
pub const POISSON_TOL: f64 = 1e-12;

/// Harmonic measure of an arc seen from `z` in the unit disk, by adaptive
/// Simpson quadrature of the Poisson kernel.
pub fn hm_disk_exact(z: C64, arc: &Arc) -> Result<HarmonicMeasureResult> {
    hm_disk_with_kernel(z, arc, poisson_kernel)
}

/// Same as [`hm_disk_exact`] with a caller-supplied kernel (fault-injection hook).
pub fn hm_disk_with_kernel(z: C64, arc: &Arc, kernel: impl Fn(C64, C64) -> f64) -> Result<HarmonicMeasureResult> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("hm_disk_exact needs |z| < 1, got {}", z.norm())));
    }
    let f = |t: f64| kernel(z, unit(t));
    // Panel breaks: uniform, plus the kernel peak so the refinement sees it.
    let mut breaks: Vec<f64> = (0..=16).map(|k| arc.t_lo + arc.length() * k as f64 / 16.0).collect();
    let theta = z.arg();
    for shift in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let p = theta + shift * TAU;
        if p > arc.t_lo && p < arc.t_hi {
            breaks.push(p);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let panels = (breaks.len() - 1) as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], POISSON_TOL / panels, 60);
    }
    Ok(HarmonicMeasureResult::exact(total))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Harmonic measure of an arc seen from `|z| > 1` in the exterior of the disk.
///
/// Reflection `z -> 1/conj(z)` fixes the circle pointwise, so the exterior
/// measure is the disk measure at the reflected point.
pub fn hm_exterior_exact(z: C64, arc: &Arc) -> Result<HarmonicMeasureResult> {
    if z.norm() <= 1.0 {
        return Err(Error::Domain(format!("hm_exterior_exact needs |z| > 1, got {}", z.norm())));
    }
    hm_disk_exact(geom::reflect(z), arc)
}

/// Which part of the boundary counts as a hit.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// Per-segment marking of the polyline.
    Segments(Vec<bool>),
    /// Boundary points inside the disk `D(center, radius)`; `closed` includes the circle.
    Disk { center: C64, radius: f64, closed: bool },
}

impl Target {
    /// Mark the segments of a polyline whose midpoints have angle inside `arc`.
    pub fn segments_in_arc(boundary: &[C64], arc: &Arc) -> Target {
        let n = boundary.len();
        Target::Segments(
            (0..n).map(|i| arc.contains(((boundary[i] + boundary[(i + 1) % n]) / 2.0).arg())).collect(),
        )
    }

    fn hit(&self, segment: usize, point: C64) -> bool {
        match self {
            Target::Segments(mask) => mask[segment],
            Target::Disk { center, radius, closed } => {
                let d = (point - center).norm();
                if *closed {
                    d <= *radius
                } else {
                    d < *radius
                }
            }
        }
    }
}

/// Absorption layer of the walks, relative to the boundary diameter.
pub const ABSORPTION_REL: f64 = 1e-4;
/// Radius of the re-entry circle for exterior walks, relative to the diameter.
pub const KILL_RADIUS_REL: f64 = 1e3;
pub const MAX_STEPS: u64 = 100_000;

/// Walk-on-spheres estimate of the harmonic measure of the marked boundary
/// part seen from `z`, inside or outside a closed polyline.
pub fn hm_monte_carlo(boundary: &[C64], target: &Target, z: C64, walks: u64, seed: u64) -> Result<HarmonicMeasureResult> {
    if boundary.len() < 3 {
        return Err(Error::InvalidInput("boundary needs at least 3 vertices".into()));
    }
    if walks < 1000 {
        return Err(Error::InvalidInput(format!("at least 1000 walks required, got {walks}")));
    }
    if let Target::Segments(mask) = target {
        if mask.len() != boundary.len() {
            return Err(Error::InvalidInput("segment mask length differs from boundary".into()));
        }
    }
    let diam = curves::brute_diam(boundary);
    curves::check_simple(boundary, 1e-12 * diam)?;
    let h = ABSORPTION_REL * diam;
    let start_dist = geom::distance_to_closed(boundary, z);
    if start_dist <= h {
        return Err(Error::PointOnCurve { point: z, distance: start_dist });
    }
    let exterior = geom::winding_closed(boundary, z) == 0;
    let centre = boundary.iter().sum::<C64>() / boundary.len() as f64;
    let kill = KILL_RADIUS_REL * diam;

    let mut hits = 0u64;
    let mut unabsorbed = 0u64;
    for walk in 0..walks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(walk);
        let mut x = z;
        let mut steps = 0u64;
        let scored = loop {
            if exterior && (x - centre).norm() > kill {
                x = reenter(x, centre, kill, &mut rng);
            }
            let (d, seg, q, _) = geom::nearest_on_closed(boundary, x);
            if d <= h {
                break Some(target.hit(seg, q));
            }
            steps += 1;
            if steps >= MAX_STEPS {
                break None;
            }
            x += unit(rng.random::<f64>() * TAU) * d;
        };
        match scored {
            Some(true) => hits += 1,
            Some(false) => {}
            None => unabsorbed += 1,
        }
    }
    if unabsorbed * 1000 > walks {
        return Err(Error::MonteCarlo(format!("{unabsorbed} of {walks} walks did not absorb")));
    }
    let used = (walks - unabsorbed) as f64;
    let p = hits as f64 / used;
    let std = (p * (1.0 - p) / (used - 1.0)).sqrt();
    Ok(HarmonicMeasureResult { value: p, method: Method::MonteCarlo, std_error: std, walks, unabsorbed })
}

/// Exact hitting distribution of the circle `|w - centre| = radius` from an outside point.
fn reenter(x: C64, centre: C64, radius: f64, rng: &mut impl Rng) -> C64 {
    let rel = x - centre;
    // Reflect inside, then push the uniform law through the disk automorphism 0 -> a.
    let a = geom::reflect(rel / radius);
    let u = unit(rng.random::<f64>() * TAU);
    centre + (u + a) / (C64::new(1.0, 0.0) + a.conj() * u) * radius
}

/// `(2/pi) asin((rho - |zeta|)/(rho + |zeta|))`, valid for `|zeta| < rho`.
pub fn bn_lower(zeta_abs: f64, rho: f64) -> Result<f64> {
    if !(zeta_abs >= 0.0 && zeta_abs < rho) {
        return Err(Error::Domain(format!("bn_lower needs 0 <= |zeta| < rho, got {zeta_abs}, {rho}")));
    }
    Ok(2.0 / PI * ((rho - zeta_abs) / (rho + zeta_abs)).asin())
}

/// `(2/pi) acos((|zeta| - rho)/(|zeta| + rho))`, valid for `|zeta| > rho > 0`.
pub fn bn_upper(zeta_abs: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && zeta_abs > rho) {
        return Err(Error::Domain(format!("bn_upper needs |zeta| > rho > 0, got {zeta_abs}, {rho}")));
    }
    Ok(2.0 / PI * ((zeta_abs - rho) / (zeta_abs + rho)).acos())
}

fn effective_eps(omega: &HarmonicMeasureResult) -> Result<f64> {
    let eps = omega.conservative();
    if eps <= 0.0 {
        return Err(Error::Domain(format!(
            "harmonic measure estimate {} (sigma {}) is not positive",
            omega.value, omega.std_error
        )));
    }
    Ok(eps.min(1.0))
}

fn annotate(r: CheckReport, omega: &HarmonicMeasureResult, seed: Option<u64>) -> CheckReport {
    r.with_method(omega.method, omega.walks, omega.std_error, seed)
}

/// Both metric consequences of a harmonic measure lower bound in a simply
/// connected domain: the distance bound (BNcor1) and the diameter bound (BNcor2).
pub fn check_bncor(
    zeta: C64,
    gamma: &PlanarSet,
    boundary: &PlanarSet,
    omega: &HarmonicMeasureResult,
    seed: Option<u64>,
) -> Result<[CheckReport; 2]> {
    let eps = effective_eps(omega)?;
    let s = (PI * eps / 4.0).sin();
    let t = (PI * eps / 4.0).tan();
    let d_gamma = point_set_dist(zeta, gamma);
    let d_boundary = point_set_dist(zeta, boundary);
    let first = CheckReport::le("BNcor1", d_gamma, d_boundary / (s * s));
    let second = CheckReport::le("BNcor2", t * t * d_gamma, set_diam(gamma));
    Ok([annotate(first, omega, seed), annotate(second, omega, seed)])
}

/// The exterior-domain analogues (distGamma, diamGamma) for a compact
/// connected boundary `K`.
pub fn check_exterior_bncor(
    zeta: C64,
    gamma: &PlanarSet,
    k: &PlanarSet,
    omega: &HarmonicMeasureResult,
    seed: Option<u64>,
) -> Result<[CheckReport; 2]> {
    let eps = effective_eps(omega)?;
    let s = (PI * eps / 4.0).sin();
    let t = (PI * eps / 4.0).tan();
    let d_gamma = point_set_dist(zeta, gamma);
    let d_k = point_set_dist(zeta, k);
    let diam_k = set_diam(k);
    let diam_g = set_diam(gamma);
    let first = CheckReport::le("distGamma", d_gamma, 4.0 * d_k / (s * s));
    let factor = (diam_k - diam_g).powi(2) / (diam_k * (diam_k + d_gamma));
    let second = CheckReport::le("diamGamma", 0.25 * t * t * factor * d_gamma, diam_g);
    Ok([annotate(first, omega, seed), annotate(second, omega, seed)])
}

/// Dense sample of the portion of a closed polyline selected by `target`.
pub fn marked_points(boundary: &[C64], target: &Target, per_segment: usize) -> Vec<C64> {
    let n = boundary.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (boundary[i], boundary[(i + 1) % n]);
        for j in 0..=per_segment {
            let p = a + (b - a) * (j as f64 / per_segment as f64);
            if target.hit(i, p) {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::c;

    /// Independent oracle: the harmonic measure of an arc equals
    /// (subtended angle)/pi - length/(2 pi), with the angle accumulated piecewise.
    fn hm_oracle(z: C64, arc: &Arc) -> f64 {
        let m = 4096;
        let angles = arc.angles(m);
        let mut sub = 0.0;
        for w in angles.windows(2) {
            sub += ((unit(w[1]) - z) / (unit(w[0]) - z)).arg();
        }
        sub / PI - arc.length() / TAU
    }

    #[test]
    fn gamma_arcs_direct_substitution() {
        let arcs = gamma_arcs(c((-1.0f64).exp(), 0.0)).unwrap();
        let want = [(-2.0, -1.0), (-1.0, -0.5), (0.5, 1.0), (1.0, 2.0)];
        for (a, (lo, hi)) in arcs.iter().zip(want) {
            assert!((a.t_lo - lo).abs() < 1e-14 && (a.t_hi - hi).abs() < 1e-14);
        }
        let rot = gamma_arcs(C64::from_polar((-1.0f64).exp(), PI / 2.0)).unwrap();
        for (a, b) in arcs.iter().zip(rot.iter()) {
            assert!((b.t_lo - a.t_lo - PI / 2.0).abs() < 1e-14);
        }
        let small = gamma_arcs(c((-0.1f64).exp(), 0.0)).unwrap();
        assert!((small[0].length() - 0.1).abs() < 1e-14);
        assert!((small[1].length() - 0.05).abs() < 1e-14);
        assert!(gamma_arcs(c(1.0, 0.0)).is_err());
        assert!(gamma_arcs(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn poisson_kernel_values() {
        assert!((poisson_kernel(c(0.0, 0.0), unit(1.3)) - 1.0 / TAU).abs() < 1e-15);
        assert!((poisson_kernel(c(0.5, 0.0), c(1.0, 0.0)) - 3.0 / TAU).abs() < 1e-14);
        assert!((poisson_kernel(c(0.5, 0.0), c(-1.0, 0.0)) - 1.0 / (6.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn disk_measure_matches_subtended_angle_oracle() {
        let pts = [c(0.0, 0.0), c(0.5, 0.2), c(-0.9, 0.3), c(0.999, 0.0), c(0.0, -0.99999)];
        let arcs = [Arc::new(-0.4, 1.1).unwrap(), Arc::new(2.0, 5.5).unwrap(), Arc::new(-0.001, 0.002).unwrap()];
        for z in pts {
            for a in &arcs {
                let v = hm_disk_exact(z, a).unwrap().value;
                let o = hm_oracle(z, a);
                assert!((v - o).abs() < 1e-9, "z={z} arc={a:?}: {v} vs {o}");
            }
        }
        let v = hm_disk_exact(c(0.0, 0.0), &Arc::new(0.0, 1.0).unwrap()).unwrap().value;
        assert!((v - 1.0 / TAU).abs() < 1e-12);
    }

    #[test]
    fn exterior_limits_and_symmetry() {
        let arc = Arc::new(0.3, 1.5).unwrap();
        let far = hm_exterior_exact(c(1e6, 0.0), &arc).unwrap().value;
        assert!((far - arc.length() / TAU).abs() < 1e-6);
        let z = c(1.7, 0.9);
        let a = hm_exterior_exact(z, &arc).unwrap().value;
        let b = hm_exterior_exact(z.conj(), &arc.conjugate()).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        // inversion route: 1/z with the conjugated arc
        let inv = hm_disk_exact(1.0 / z, &arc.conjugate()).unwrap().value;
        assert!((a - inv).abs() < 1e-11);
    }

    #[test]
    fn bn_bounds() {
        assert!((bn_lower(0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((bn_lower(1.0 / 3.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((bn_upper(3.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(bn_lower(2.0, 1.0).is_err());
        assert!(bn_upper(1.0, 2.0).is_err());
    }

    #[test]
    fn bncor_on_disk() {
        let arc = Arc::new(0.0, TAU * 0.2).unwrap();
        let omega = hm_disk_exact(c(0.0, 0.0), &arc).unwrap();
        assert!((omega.value - 0.2).abs() < 1e-12);
        let circle = Arc::new(0.0, TAU).unwrap().sample(720);
        let [a, b] = check_bncor(c(0.0, 0.0), &arc.sample(200), &circle, &omega, None).unwrap();
        assert!(a.margin > 0.0 && b.margin > 0.0);
        let full = HarmonicMeasureResult::exact(1.0);
        let [a, _] = check_bncor(c(0.2, 0.0), &circle, &circle, &full, None).unwrap();
        assert!((a.rhs - 2.0 * a.lhs).abs() < 1e-9);
        let zero = HarmonicMeasureResult::exact(0.0);
        assert!(check_bncor(c(0.0, 0.0), &circle, &circle, &zero, None).is_err());
    }

    fn polygon_circle(m: usize) -> Vec<C64> {
        (0..m).map(|k| unit(TAU * k as f64 / m as f64)).collect()
    }

    #[test]
    fn monte_carlo_half_circle() {
        let b = polygon_circle(256);
        let t = Target::segments_in_arc(&b, &Arc::new(0.0, PI).unwrap());
        let r = hm_monte_carlo(&b, &t, c(0.0, 0.0), 20_000, 7).unwrap();
        assert!((r.value - 0.5).abs() <= 3.0 * r.std_error, "{r:?}");
        assert!(r.std_error > 0.0 && r.walks == 20_000);
    }

    #[test]
    fn monte_carlo_square_side() {
        let b = vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)];
        let t = Target::Segments(vec![true, false, false, false]);
        let r = hm_monte_carlo(&b, &t, c(0.0, 0.0), 20_000, 3).unwrap();
        assert!((r.value - 0.25).abs() <= 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn monte_carlo_matches_gamma_arc() {
        let z = c((-0.5f64).exp(), 0.0);
        let arc = gamma_arcs(z).unwrap()[0];
        let exact = hm_disk_exact(z, &arc).unwrap().value;
        let b = polygon_circle(1024);
        let t = Target::segments_in_arc(&b, &arc);
        let r = hm_monte_carlo(&b, &t, z, 20_000, 11).unwrap();
        assert!((r.value - exact).abs() <= 3.0 * r.std_error, "{r:?} vs {exact}");
    }

    #[test]
    fn monte_carlo_exterior_of_circle() {
        let b = polygon_circle(512);
        let arc = Arc::new(0.2, 1.4).unwrap();
        let z = c(1.6, 0.5);
        let exact = hm_exterior_exact(z, &arc).unwrap().value;
        let t = Target::segments_in_arc(&b, &arc);
        let r = hm_monte_carlo(&b, &t, z, 10_000, 5).unwrap();
        assert!((r.value - exact).abs() <= 3.0 * r.std_error, "{r:?} vs {exact}");
    }

    #[test]
    fn monte_carlo_rejects_bad_input() {
        let b = polygon_circle(16);
        let t = Target::Segments(vec![true; 16]);
        assert!(hm_monte_carlo(&b, &t, c(0.0, 0.0), 10, 1).is_err());
        assert!(hm_monte_carlo(&b, &t, b[0], 1000, 1).is_err());
        let bow = vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)];
        let t = Target::Segments(vec![true; 4]);
        assert!(hm_monte_carlo(&bow, &t, c(0.5, 0.2), 1000, 1).is_err());
    }
}
