//! The full inequality suite behind the `verify` command.
//!
//! Every check is a [`CheckReport`] tagged with the name of the inequality it
//! instantiates; [`summarize`] folds them into per-name margin statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ba_ext::CircleHomeoLift;
use crate::conformal::{
    boundary_homeo, exterior_map, interior_map, radial_bounds, verify_exterior_derivative_bounds,
    verify_interior_derivative_bounds,
};
use crate::curves::{circle, ellipse, make_embedding, CircleEmbedding, CurveSpec, Family, PlanarSet};
use crate::error::{Error, Result};
use crate::extend::{extend_plane_symmetric, GridSpec, Region};
use crate::geom::{self, c, unit, C64, PI, TAU};
use crate::harmonic::{
    bn_lower, bn_upper, check_bncor, check_exterior_bncor, gamma_arcs, hm_disk_with_kernel, hm_monte_carlo,
    marked_points, poisson_kernel, Arc, Target,
};
use crate::report::{CheckReport, Method};

/// Inequality names in report order.
pub const INEQUALITIES: [&str; 26] = [
    "BN1",
    "BN2",
    "BNcor1",
    "BNcor2",
    "lowerharm1",
    "lowerharm2",
    "Koebe",
    "Koebedist1",
    "confderest1",
    "confderest2",
    "maxstr",
    "minstr",
    "imext",
    "modext",
    "BAderest1",
    "BAderest2",
    "extderest1",
    "extderest2",
    "capdiam",
    "Sigmadist",
    "derdistext1",
    "derdistext2",
    "distGamma",
    "diamGamma",
    "distdiam",
    "modext2",
];

/// Relative tolerance applied to every margin.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Factor by which the fault hook scales the Poisson kernel.
pub const POISSON_FAULT_SCALE: f64 = 1e-2;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub walks: u64,
    /// Random polygonal domains for the projection-theorem bounds.
    pub bn_configurations: usize,
    /// Random points for the disk arc bounds.
    pub lowerharm_points: usize,
    /// Random points per lift for the extension bounds.
    pub ba_points: usize,
    pub tolerance: f64,
    /// Test hook: evaluate the arc bounds with a corrupted Poisson kernel.
    pub poisson_fault: bool,
    pub corpus: Vec<(String, CircleEmbedding)>,
}

impl VerifyConfig {
    pub fn new(seed: u64, walks: u64) -> Result<Self> {
        Ok(Self {
            seed,
            walks,
            bn_configurations: 12,
            lowerharm_points: 200,
            ba_points: 100,
            tolerance: DEFAULT_TOLERANCE,
            poisson_fault: false,
            corpus: default_corpus()?,
        })
    }
}

/// Centrally symmetric curves every conformal and extension suite runs on.
pub fn default_corpus() -> Result<Vec<(String, CircleEmbedding)>> {
    let trig = CurveSpec::Family {
        family: Family::Trig { radial_amp: 0.1, radial_freq: 4, phase_amp: 0.1, phase_freq: 2 },
        n: 128,
    };
    Ok(vec![
        ("circle".into(), circle(c(0.0, 0.0), 1.0, 128)?),
        ("circle_r2".into(), circle(c(0.0, 0.0), 2.0, 128)?),
        ("ellipse_2_1".into(), ellipse(2.0, 1.0, 128)?),
        ("trig".into(), make_embedding(&trig)?),
    ])
}

/// Margin statistics of all checks sharing one name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalitySummary {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    pub min_margin: f64,
    pub mean_margin: f64,
    pub max_margin: f64,
    /// `margin / max(|lhs|, |rhs|)` of the worst check.
    pub min_relative_margin: f64,
    pub pass: bool,
    pub worst: Option<CheckReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub walks: u64,
    pub tolerance: f64,
    pub poisson_fault: bool,
    pub corpus: Vec<String>,
    pub inequalities: Vec<InequalitySummary>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn get(&self, name: &str) -> Option<&InequalitySummary> {
        self.inequalities.iter().find(|s| s.name == name)
    }
}

fn scale_of(r: &CheckReport) -> f64 {
    r.lhs.abs().max(r.rhs.abs()).max(f64::MIN_POSITIVE)
}

/// A check holds when its margin is at least `-tol * max(|lhs|, |rhs|)`.
pub fn holds(r: &CheckReport, tol: f64) -> bool {
    r.margin >= -tol * scale_of(r)
}

/// Per-name statistics in [`INEQUALITIES`] order; a name without checks fails.
pub fn summarize(checks: &[CheckReport], tol: f64) -> Vec<InequalitySummary> {
    INEQUALITIES
        .iter()
        .map(|&name| {
            let group: Vec<&CheckReport> = checks.iter().filter(|r| r.name == name).collect();
            let violations = group.iter().filter(|r| !holds(r, tol)).count();
            let worst = group
                .iter()
                .min_by(|a, b| (a.margin / scale_of(a)).total_cmp(&(b.margin / scale_of(b))))
                .map(|r| (*r).clone());
            let margins: Vec<f64> = group.iter().map(|r| r.margin).collect();
            let n = margins.len().max(1) as f64;
            InequalitySummary {
                name: name.into(),
                checks: group.len(),
                violations,
                min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
                mean_margin: margins.iter().sum::<f64>() / n,
                max_margin: margins.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min_relative_margin: worst.as_ref().map_or(f64::NAN, |r| r.margin / scale_of(r)),
                pass: !group.is_empty() && violations == 0,
                worst,
            }
        })
        .collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn walk_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
}

/// Star-shaped polygon around a centre at distance 1.3 to 2 from the origin,
/// so the origin lies outside, with an interior point and two radii.
struct BnConfiguration {
    polygon: Vec<C64>,
    zeta: C64,
    rho_inside: f64,
    rho_outside: f64,
}

fn bn_configuration(rng: &mut ChaCha8Rng) -> BnConfiguration {
    let m = rng.random_range(5..=12);
    let centre = unit(rng.random_range(0.0..TAU)) * rng.random_range(1.3..2.0);
    let polygon: Vec<C64> = (0..m)
        .map(|k| centre + unit((k as f64 + rng.random_range(-0.3..0.3)) * TAU / m as f64) * rng.random_range(0.6..1.0))
        .collect();
    let zeta = centre + unit(rng.random_range(0.0..TAU)) * rng.random_range(0.0..0.35);
    let a = zeta.norm();
    let d0 = geom::distance_to_closed(&polygon, c(0.0, 0.0));
    BnConfiguration {
        polygon,
        zeta,
        rho_inside: a * rng.random_range(1.05..1.8),
        rho_outside: d0 + (a - d0) * rng.random_range(0.1..0.9),
    }
}

/// Projection-theorem bounds on random polygons avoiding the origin, with
/// the walk estimates widened by three standard errors.
pub fn bn_checks(configurations: usize, walks: u64, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(seed, 1);
    let mut out = Vec::with_capacity(2 * configurations);
    for k in 0..configurations {
        let cfg = bn_configuration(&mut rng);
        let a = cfg.zeta.norm();
        let s = walk_seed(seed, 2 * k as u64);
        let inside = Target::Disk { center: c(0.0, 0.0), radius: cfg.rho_inside, closed: false };
        let w = hm_monte_carlo(&cfg.polygon, &inside, cfg.zeta, walks, s)?;
        out.push(
            CheckReport::le("BN1", bn_lower(a, cfg.rho_inside)?, w.value + 3.0 * w.std_error)
                .with_method(Method::MonteCarlo, walks, w.std_error, Some(s)),
        );
        let s = walk_seed(seed, 2 * k as u64 + 1);
        let outside = Target::Disk { center: c(0.0, 0.0), radius: cfg.rho_outside, closed: true };
        let w = hm_monte_carlo(&cfg.polygon, &outside, cfg.zeta, walks, s)?;
        out.push(
            CheckReport::le("BN2", w.value - 3.0 * w.std_error, bn_upper(a, cfg.rho_outside)?)
                .with_method(Method::MonteCarlo, walks, w.std_error, Some(s)),
        );
    }
    Ok(out)
}

/// Lower bounds for the harmonic measure of the four arcs at random points,
/// half of them in the thin annulus where all four bounds apply.
pub fn lowerharm_checks(points: usize, seed: u64, poisson_fault: bool) -> Result<Vec<CheckReport>> {
    let kernel = |z: C64, zeta: C64| {
        let p = poisson_kernel(z, zeta);
        if poisson_fault {
            p * POISSON_FAULT_SCALE
        } else {
            p
        }
    };
    let mut rng = rng_for(seed, 2);
    let mut out = Vec::new();
    for k in 0..points {
        let cap = if k % 2 == 0 { PI / 4.0 } else { TAU };
        let delta = rng.random_range(1e-3..cap);
        let z = unit(rng.random_range(0.0..TAU)) * (-delta).exp();
        let arcs = gamma_arcs(z)?;
        for (j, arc) in arcs.iter().enumerate() {
            let w = hm_disk_with_kernel(z, arc, kernel)?;
            let check = match j {
                0 | 3 if z.norm() > (-PI / 4.0).exp() => CheckReport::le("lowerharm1", 1.0 / (30.0 * PI), w.value),
                1 | 2 => CheckReport::le("lowerharm2", 1.0 / (64.0 * PI), w.value),
                _ => continue,
            };
            out.push(check.with_method(Method::PoissonExact, 0, 0.0, None));
        }
    }
    Ok(out)
}

fn polar_points(radii: &[f64], angles: usize, phase: f64) -> Vec<C64> {
    radii
        .iter()
        .flat_map(|&r| (0..angles).map(move |k| unit(phase + TAU * k as f64 / angles as f64) * r))
        .collect()
}

const INTERIOR_RADII: [f64; 6] = [0.0, 0.1, 0.5, 0.8, 0.95, 0.99];
const EXTERIOR_RADII: [f64; 6] = [1.01, 1.1, 1.5, 2.5, 10.0, 1e3];

/// Interior and exterior conformal derivative bounds on a polar sample.
/// Samples per prevertex interval when tracing a map's boundary.
const BOUNDARY_SAMPLES: usize = 8;

pub fn conformal_checks(curve: &CircleEmbedding) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let inner = interior_map(curve, 1)?;
    let radii = radial_bounds(curve);
    let boundary = inner.conformal_boundary(BOUNDARY_SAMPLES);
    for z in polar_points(&INTERIOR_RADII, 16, 0.1) {
        out.extend(verify_interior_derivative_bounds(&inner, &boundary, z, radii)?);
    }
    let outer = exterior_map(curve, 1)?;
    let boundary = outer.conformal_boundary(BOUNDARY_SAMPLES);
    for z in polar_points(&EXTERIOR_RADII, 16, 0.1) {
        out.extend(verify_exterior_derivative_bounds(&outer, curve, &boundary, z)?);
    }
    Ok(out)
}

fn all_marked(boundary: &[C64]) -> PlanarSet {
    PlanarSet(marked_points(boundary, &Target::Segments(vec![true; boundary.len()]), 8))
}

/// Metric corollaries of harmonic measure bounds with walk estimates: two
/// interior and two exterior base points per curve, arcs of a quarter turn.
pub fn corollary_checks(curve: &CircleEmbedding, walks: u64, seed: u64) -> Result<Vec<CheckReport>> {
    let boundary = curve.points();
    let full = all_marked(boundary);
    let inner = interior_map(curve, 1)?;
    let outer = exterior_map(curve, 1)?;
    let mut rng = rng_for(seed, 3);
    let mut out = Vec::new();
    for k in 0..4u64 {
        let a = rng.random_range(0.0..TAU);
        let arc = Arc::new(a - PI / 4.0, a + PI / 4.0)?;
        let target = Target::segments_in_arc(boundary, &arc);
        let gamma = PlanarSet(marked_points(boundary, &target, 8));
        if gamma.0.is_empty() {
            continue;
        }
        let s = walk_seed(seed, 1000 + k);
        if k < 2 {
            let zeta = inner.eval(unit(a) * 0.6)?;
            let w = hm_monte_carlo(boundary, &target, zeta, walks, s)?;
            out.extend(check_bncor(zeta, &gamma, &full, &w, Some(s))?);
        } else {
            let zeta = outer.eval(unit(a) * 1.3)?;
            let w = hm_monte_carlo(boundary, &target, zeta, walks, s)?;
            out.extend(check_exterior_bncor(zeta, &gamma, &full, &w, Some(s))?);
        }
    }
    Ok(out)
}

/// Bounds of the modified Beurling-Ahlfors extension of `chi` at random points
/// of the strip `0 < Im z < 4 pi`, i.e. `e^{-4 pi} < |zeta| < 1`.
pub fn ba_checks(chi: &CircleHomeoLift, points: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(seed, 4);
    let e4 = (4.0 * PI).exp();
    let mut out = Vec::new();
    for _ in 0..points {
        let x = rng.random_range(0.0..TAU);
        let y = (rng.random_range((1e-3f64).ln()..(4.0 * PI).ln())).exp();
        let z = c(x, y);
        let w = chi.ba_extend(z)?;
        out.push(CheckReport::le("imext", (w.im - y).abs(), 4.0 * PI));
        let zeta = unit(x) * (-y).exp();
        let b = chi.psi_jacobian_bounds(zeta)?;
        out.push(CheckReport::le("maxstr", b.chi_e_norm, b.maxstr_bound));
        out.push(CheckReport::le("minstr", b.chi_e_inverse_norm, b.minstr_bound));
        out.push(CheckReport::le("modext", 1.0 / e4, b.modulus_ratio));
        out.push(CheckReport::le("modext", b.modulus_ratio, e4));
        out.push(CheckReport::le("BAderest1", b.norm, b.norm_bound));
        out.push(CheckReport::le("BAderest2", b.inverse_norm, b.inverse_norm_bound));
    }
    Ok(out)
}

/// `e^{-8 pi} <= |zeta|^2 |z|^2 <= e^{8 pi}` over an exterior grid.
pub fn annulus_checks(curve: &CircleEmbedding) -> Result<Vec<CheckReport>> {
    let ext = extend_plane_symmetric(curve)?;
    let grid = GridSpec { radii: 8, angles: 32 };
    let (lo, hi) = ext.exterior_modulus_range(&grid.points(Region::Outer))?;
    let e8 = (8.0 * PI).exp();
    Ok(vec![CheckReport::le("modext2", 1.0 / e8, lo), CheckReport::le("modext2", hi, e8)])
}

/// Analytic symmetric lift used alongside the corpus lifts.
fn analytic_lift() -> Result<CircleHomeoLift> {
    let nodes = (0..256)
        .map(|k| {
            let t = TAU * k as f64 / 256.0;
            (t, t + 0.3 * (2.0 * t).sin())
        })
        .collect();
    CircleHomeoLift::from_nodes(nodes)
}

/// Run every suite and summarize.
pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.corpus.is_empty() {
        return Err(Error::InvalidInput("verification corpus is empty".into()));
    }
    let seed = config.seed;
    let mut checks = bn_checks(config.bn_configurations, config.walks, seed)?;
    checks.extend(lowerharm_checks(config.lowerharm_points, seed, config.poisson_fault)?);
    checks.extend(ba_checks(&analytic_lift()?, config.ba_points, seed)?);
    for (k, (_, curve)) in config.corpus.iter().enumerate() {
        let curve_seed = walk_seed(seed, 1 << 20 | k as u64);
        checks.extend(conformal_checks(curve)?);
        checks.extend(corollary_checks(curve, config.walks, curve_seed)?);
        if curve.is_symmetric() {
            let chi = boundary_homeo(&interior_map(curve, 1)?, curve)?;
            checks.extend(ba_checks(&chi, config.ba_points, curve_seed)?);
            checks.extend(annulus_checks(curve)?);
        }
    }
    let inequalities = summarize(&checks, config.tolerance);
    let pass = inequalities.iter().all(|s| s.pass);
    Ok(VerifyReport {
        seed,
        walks: config.walks,
        tolerance: config.tolerance,
        poisson_fault: config.poisson_fault,
        corpus: config.corpus.iter().map(|(name, _)| name.clone()).collect(),
        inequalities,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_violations() {
        let checks = vec![CheckReport::le("BN1", 0.1, 0.2), CheckReport::le("BN1", 0.3, 0.2)];
        let s = summarize(&checks, 1e-6);
        let bn1 = &s[0];
        assert_eq!((bn1.checks, bn1.violations), (2, 1));
        assert!(!bn1.pass);
        assert!((bn1.min_margin + 0.1).abs() < 1e-15);
        assert!(!s[1].pass && s[1].checks == 0);
    }

    #[test]
    fn relative_tolerance() {
        assert!(holds(&CheckReport::le("x", 1.0 + 1e-7, 1.0), 1e-6));
        assert!(!holds(&CheckReport::le("x", 1.0 + 1e-5, 1.0), 1e-6));
        assert!(!holds(&CheckReport::le("x", f64::NAN, 1.0), 1e-6));
    }

    #[test]
    fn lowerharm_passes_and_fault_fails() {
        let good = lowerharm_checks(40, 42, false).unwrap();
        assert!(good.iter().any(|r| r.name == "lowerharm1"));
        assert!(good.iter().all(|r| holds(r, 0.0)));
        let bad = lowerharm_checks(40, 42, true).unwrap();
        assert!(bad.iter().any(|r| !holds(r, 0.0)));
    }

    #[test]
    fn bn_small_run() {
        let checks = bn_checks(3, 2000, 7).unwrap();
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(|r| holds(r, 0.0)), "{checks:?}");
    }

    #[test]
    fn ba_bounds_on_analytic_lift() {
        let checks = ba_checks(&analytic_lift().unwrap(), 50, 3).unwrap();
        assert!(checks.iter().all(|r| holds(r, 1e-9)), "{:?}", checks.iter().find(|r| !holds(r, 1e-9)));
    }

    #[test]
    fn conformal_checks_on_ellipse() {
        let checks = conformal_checks(&ellipse(2.0, 1.0, 128).unwrap()).unwrap();
        for name in ["Koebe", "Koebedist1", "capdiam", "Sigmadist", "derdistext1", "distdiam"] {
            assert!(checks.iter().any(|r| r.name == name), "{name}");
        }
        let bad: Vec<_> = checks.iter().filter(|r| !holds(r, 1e-6)).collect();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn corollaries_on_circle() {
        let checks = corollary_checks(&circle(c(0.0, 0.0), 1.0, 64).unwrap(), 2000, 5).unwrap();
        assert_eq!(checks.len(), 8);
        assert!(checks.iter().all(|r| holds(r, 0.0)), "{checks:?}");
    }
}
