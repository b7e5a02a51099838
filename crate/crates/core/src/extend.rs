//! Extensions of a symmetric circle embedding to the disk, its complement,
//! and the whole plane, with grid-based Jacobian measurement.

use serde::{Deserialize, Serialize};

use crate::ba_ext::CircleHomeoLift;
use crate::conformal::{boundary_homeo, exterior_map, interior_map, ConformalMap};
use crate::curves::{bilipschitz_constants, BiLipschitzReport, CircleEmbedding, PairStrategy};
use crate::error::{Error, Result};
use crate::geom::{unit, Jacobian2, C64, PI, TAU};
use crate::report::CheckReport;

/// Zipper subdivisions per curve segment used by the extension builders.
pub const DEFAULT_RESOLUTION: usize = 1;
/// Minimum distance of measurement grids from the unit circle.
pub const GRID_GAP: f64 = 1e-3;

/// A map of (part of) the plane with values and Jacobians.
pub trait Extension {
    /// `F(z)`; defined on the closed region of the extension.
    fn eval(&self, z: C64) -> Result<C64>;
    /// `F(z)` and `DF(z)` off the unit circle and the origin.
    fn eval_with_jacobian(&self, z: C64) -> Result<(C64, Jacobian2)>;
}

fn fold_error(at: C64, j: &Jacobian2) -> Error {
    Error::OrientationFold { at, det: j.det() }
}

fn reflection(z: C64) -> Jacobian2 {
    Jacobian2::from_antiholomorphic(-(z.conj() * z.conj()).inv())
}

/// `F = Phi o Psi^{-1}` on the closed unit disk.
#[derive(Clone, Debug)]
pub struct DiskExtension {
    map: ConformalMap,
    chi: CircleHomeoLift,
}

/// `F = Phi_e o r o Psi_e^{-1} o r` on `|z| >= 1`, where `r(z) = 1 / conj(z)`.
#[derive(Clone, Debug)]
pub struct ExteriorExtension {
    map: ConformalMap,
    chi: CircleHomeoLift,
}

fn require_symmetric(f: &CircleEmbedding) -> Result<()> {
    if f.is_symmetric() {
        Ok(())
    } else {
        Err(Error::Symmetry("extension builders need a centrally symmetric embedding".into()))
    }
}

pub fn extend_disk(f: &CircleEmbedding) -> Result<DiskExtension> {
    require_symmetric(f)?;
    let map = interior_map(f, DEFAULT_RESOLUTION)?;
    let chi = boundary_homeo(&map, f)?;
    Ok(DiskExtension { map, chi })
}

pub fn extend_exterior(f: &CircleEmbedding) -> Result<ExteriorExtension> {
    require_symmetric(f)?;
    let map = exterior_map(f, DEFAULT_RESOLUTION)?;
    let chi = boundary_homeo(&map, f)?;
    Ok(ExteriorExtension { map, chi })
}

impl DiskExtension {
    pub fn conformal_map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn boundary_lift(&self) -> &CircleHomeoLift {
        &self.chi
    }
}

impl Extension for DiskExtension {
    fn eval(&self, z: C64) -> Result<C64> {
        self.map.eval(self.chi.psi_inverse(z)?)
    }

    fn eval_with_jacobian(&self, z: C64) -> Result<(C64, Jacobian2)> {
        let zeta = self.chi.psi_inverse(z)?;
        let (v, jphi) = self.map.eval_with_jacobian(zeta)?;
        let jpsi = self.chi.psi_jacobian(zeta)?;
        let inv = jpsi.inverse().filter(|_| jpsi.det() > 0.0).ok_or_else(|| fold_error(z, &jpsi))?;
        Ok((v, jphi.mul(&inv)))
    }
}

impl ExteriorExtension {
    pub fn conformal_map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn boundary_lift(&self) -> &CircleHomeoLift {
        &self.chi
    }

    /// `z = Psi_e^{-1}(r(zeta))` for `|zeta| >= 1`.
    pub fn pulled_back(&self, zeta: C64) -> Result<C64> {
        if !(zeta.norm() >= 1.0 - 1e-14) {
            return Err(Error::Domain(format!("exterior extension needs |z| >= 1, got {zeta}")));
        }
        self.chi.psi_inverse(zeta.conj().inv())
    }
}

impl Extension for ExteriorExtension {
    fn eval(&self, zeta: C64) -> Result<C64> {
        let z = self.pulled_back(zeta)?;
        self.map.eval(z.conj().inv())
    }

    fn eval_with_jacobian(&self, zeta: C64) -> Result<(C64, Jacobian2)> {
        let z = self.pulled_back(zeta)?;
        let w = z.conj().inv();
        let (v, jphi) = self.map.eval_with_jacobian(w)?;
        let jpsi = self.chi.psi_jacobian(z)?;
        let inv = jpsi.inverse().filter(|_| jpsi.det() > 0.0).ok_or_else(|| fold_error(zeta, &jpsi))?;
        Ok((v, jphi.mul(&reflection(z)).mul(&inv).mul(&reflection(zeta))))
    }
}

/// Glued global extension of a centrally symmetric embedding.
#[derive(Clone, Debug)]
pub struct PlaneExtension {
    pub inner: DiskExtension,
    pub outer: ExteriorExtension,
    pub boundary: CircleEmbedding,
}

pub fn extend_plane_symmetric(f: &CircleEmbedding) -> Result<PlaneExtension> {
    Ok(PlaneExtension { inner: extend_disk(f)?, outer: extend_exterior(f)?, boundary: f.clone() })
}

impl Extension for PlaneExtension {
    fn eval(&self, z: C64) -> Result<C64> {
        if z.norm() <= 1.0 {
            self.inner.eval(z)
        } else {
            self.outer.eval(z)
        }
    }

    fn eval_with_jacobian(&self, z: C64) -> Result<(C64, Jacobian2)> {
        if z.norm() < 1.0 {
            self.inner.eval_with_jacobian(z)
        } else {
            self.outer.eval_with_jacobian(z)
        }
    }
}

/// Polar grid: `radii x angles` points per region, radii log-spaced in
/// `delta = |ln r|` between `-ln(1 - GRID_GAP)` and `2 pi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: usize,
    pub angles: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radii: 64, angles: 256 }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses `RADIIxANGLES`, e.g. `64x256`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("grid spec must look like 64x256, got {s:?}"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let radii: usize = a.trim().parse().map_err(|_| bad())?;
        let angles: usize = b.trim().parse().map_err(|_| bad())?;
        if radii < 2 || angles < 4 {
            return Err(bad());
        }
        Ok(GridSpec { radii, angles })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Inner,
    Outer,
}

impl GridSpec {
    pub fn deltas(&self) -> Vec<f64> {
        let lo = -(1.0 - GRID_GAP).ln();
        let hi = TAU;
        (0..self.radii)
            .map(|k| lo * (hi / lo).powf(k as f64 / (self.radii - 1) as f64))
            .collect()
    }

    pub fn points(&self, region: Region) -> Vec<C64> {
        let sign = match region {
            Region::Inner => -1.0,
            Region::Outer => 1.0,
        };
        let mut out = Vec::with_capacity(self.radii * self.angles);
        for d in self.deltas() {
            let r = (sign * d).exp();
            for j in 0..self.angles {
                out.push(C64::from_polar(r, TAU * (j as f64 + 0.5) / self.angles as f64));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub point: C64,
    pub image: C64,
    pub norm: f64,
    pub inverse_norm: f64,
    pub det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub sup_norm: f64,
    pub sup_inverse_norm: f64,
    pub argmax_norm: C64,
    pub argmax_inverse_norm: C64,
    pub min_det: f64,
    pub num_points: usize,
    #[serde(skip)]
    pub rows: Vec<GridRow>,
}

/// Jacobian norms of `F` over `points`; a non-positive determinant is an orientation fold.
pub fn jacobian_report(f: &dyn Extension, points: &[C64]) -> Result<JacobianReport> {
    let mut rows = Vec::with_capacity(points.len());
    for &z in points {
        let (image, j) = f.eval_with_jacobian(z)?;
        let det = j.det();
        if !(det > 0.0) || !j.is_finite() {
            return Err(Error::OrientationFold { at: z, det });
        }
        rows.push(GridRow { point: z, image, norm: j.norm(), inverse_norm: j.inverse_norm(), det });
    }
    let mut rep = JacobianReport {
        sup_norm: 0.0,
        sup_inverse_norm: 0.0,
        argmax_norm: C64::new(0.0, 0.0),
        argmax_inverse_norm: C64::new(0.0, 0.0),
        min_det: f64::INFINITY,
        num_points: rows.len(),
        rows: Vec::new(),
    };
    for r in &rows {
        if r.norm > rep.sup_norm {
            rep.sup_norm = r.norm;
            rep.argmax_norm = r.point;
        }
        if r.inverse_norm > rep.sup_inverse_norm {
            rep.sup_inverse_norm = r.inverse_norm;
            rep.argmax_inverse_norm = r.point;
        }
        rep.min_det = rep.min_det.min(r.det);
    }
    rep.rows = rows;
    Ok(rep)
}

/// Rejects grids whose images collide: two distinct points mapped within `tol` of each other.
pub fn check_injective(rows: &[GridRow], tol: f64) -> Result<()> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| rows[a].image.re.total_cmp(&rows[b].image.re));
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            if rows[j].image.re - rows[i].image.re > tol {
                break;
            }
            if (rows[j].image - rows[i].image).norm() <= tol && rows[i].point != rows[j].point {
                return Err(Error::NonConvergence(format!(
                    "grid images of {} and {} coincide",
                    rows[i].point, rows[j].point
                )));
            }
        }
    }
    Ok(())
}

/// Circle parameters used for boundary comparisons: every node, every segment midpoint, and a uniform set.
pub fn boundary_params(f: &CircleEmbedding, uniform: usize) -> Vec<f64> {
    let p = f.params();
    let n = p.len();
    let mut ts = Vec::with_capacity(2 * n + uniform);
    for k in 0..n {
        let next = if k + 1 < n { p[k + 1] } else { p[0] + TAU };
        ts.push(p[k]);
        ts.push(0.5 * (p[k] + next));
    }
    ts.extend((0..uniform).map(|k| TAU * (k as f64 + 0.25) / uniform as f64));
    ts
}

/// `sup_t |F(e^{it}) - f(e^{it})|` over [`boundary_params`].
pub fn boundary_agreement(ext: &dyn Extension, f: &CircleEmbedding) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in boundary_params(f, 512) {
        worst = worst.max((ext.eval(unit(t))? - f.eval(t)).norm());
    }
    Ok(worst)
}

impl PlaneExtension {
    /// Boundary agreement of the inner and outer evaluators, in that order.
    pub fn boundary_agreement(&self) -> Result<(f64, f64)> {
        Ok((boundary_agreement(&self.inner, &self.boundary)?, boundary_agreement(&self.outer, &self.boundary)?))
    }

    /// `max |F(-z) + F(z)|` over `points`.
    pub fn symmetry_defect(&self, points: &[C64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &z in points {
            worst = worst.max((self.eval(-z)? + self.eval(z)?).norm());
        }
        Ok(worst)
    }

    /// Range of `|zeta|^2 |z|^2` with `z = Psi_e^{-1}(1 / conj(zeta))` over `points`.
    pub fn exterior_modulus_range(&self, points: &[C64]) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &zeta in points {
            let z = self.outer.pulled_back(zeta)?;
            let v = zeta.norm_sqr() * z.norm_sqr();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }
}

/// Which of the distortion theorems a measured extension is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Disk part of a symmetric extension: `10^13 L`, `10^11 / l`.
    Disk,
    /// Global symmetric extension: `10^27 L`, `10^23 / l`.
    Symmetric,
    /// Global extension of an arbitrary embedding: `10^28 L`, `10^25 L / l^2`.
    General,
}

impl Regime {
    /// Upper bounds for `sup ||DF||` and `sup ||DF^{-1}||` given the embedding's constants.
    pub fn bounds(self, upper_l: f64, lower_l: f64) -> (f64, f64) {
        match self {
            Regime::Disk => (1e13 * upper_l, 1e11 / lower_l),
            Regime::Symmetric => (1e27 * upper_l, 1e23 / lower_l),
            Regime::General => (1e28 * upper_l, 1e25 * upper_l / (lower_l * lower_l)),
        }
    }

    pub fn margins(self, jac: &JacobianReport, upper_l: f64, lower_l: f64) -> Vec<CheckReport> {
        let (a, b) = self.bounds(upper_l, lower_l);
        vec![CheckReport::le("sup_DF", jac.sup_norm, a), CheckReport::le("sup_DF_inv", jac.sup_inverse_norm, b)]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witnesses {
    pub argmax_norm: C64,
    pub argmax_inverse_norm: C64,
    pub curve_argmax_pair: [C64; 2],
    pub curve_argmin_pair: [C64; 2],
}

/// Summary written by the `extend` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub boundary_agreement: f64,
    #[serde(rename = "sup_DF")]
    pub sup_df: f64,
    #[serde(rename = "sup_DF_inv")]
    pub sup_df_inv: f64,
    #[serde(rename = "empirical_L")]
    pub empirical_upper: f64,
    #[serde(rename = "empirical_l")]
    pub empirical_lower: f64,
    pub regime: Regime,
    pub paper_bound_margins: Vec<CheckReport>,
    pub grid_spec: GridSpec,
    pub witnesses: Witnesses,
    pub min_det: f64,
    pub extension_constants: Option<BiLipschitzReport>,
}

/// Measure `ext` on both grid regions and compare with the theorem bounds for `regime`.
pub fn extension_report(
    ext: &dyn Extension,
    f: &CircleEmbedding,
    constants: &BiLipschitzReport,
    grid: GridSpec,
    regime: Regime,
    seed: u64,
) -> Result<(ExtensionReport, Vec<GridRow>)> {
    let mut pts = grid.points(Region::Inner);
    if regime != Regime::Disk {
        pts.extend(grid.points(Region::Outer));
    }
    let jac = jacobian_report(ext, &pts)?;
    let scale = f.diam();
    check_injective(&jac.rows, 1e-9 * scale)?;
    let samples: Vec<(C64, C64)> = jac.rows.iter().map(|r| (r.point, r.image)).collect();
    let global = bilipschitz_constants(&samples, PairStrategy::Random { budget: 200_000, seed }).ok();
    let report = ExtensionReport {
        boundary_agreement: boundary_agreement(ext, f)?,
        sup_df: jac.sup_norm,
        sup_df_inv: jac.sup_inverse_norm,
        empirical_upper: constants.upper_l,
        empirical_lower: constants.lower_l,
        regime,
        paper_bound_margins: regime.margins(&jac, constants.upper_l, constants.lower_l),
        grid_spec: grid,
        witnesses: Witnesses {
            argmax_norm: jac.argmax_norm,
            argmax_inverse_norm: jac.argmax_inverse_norm,
            curve_argmax_pair: constants.argmax_pair.image,
            curve_argmin_pair: constants.argmin_pair.image,
        },
        min_det: jac.min_det,
        extension_constants: global,
    };
    Ok((report, jac.rows))
}

/// Polar grid lines (circles and rays) of the disk of radius `e^{pi/4}`,
/// sampled finely, for plotting images under an extension.
pub fn polar_grid_lines(circles: usize, rays: usize, m: usize) -> Vec<Vec<C64>> {
    let rmax = (PI / 4.0).exp();
    let mut lines = Vec::new();
    for k in 1..=circles {
        let r = rmax * k as f64 / circles as f64;
        lines.push((0..m).map(|j| C64::from_polar(r, TAU * j as f64 / m as f64)).collect());
    }
    for k in 0..rays {
        let dir = unit(TAU * k as f64 / rays as f64);
        lines.push((1..=m).map(|j| dir * (rmax * j as f64 / m as f64)).collect());
    }
    lines
}
