//! Winding symmetrization: turning an arbitrary embedding into a centrally
//! symmetric one and carrying symmetric extensions back.

use serde::{Deserialize, Serialize};

use crate::curves::{
    bilipschitz_constants, curve_constants, incenter, winding_number, BiLipschitzReport, CircleEmbedding,
    PairStrategy, INCENTER_GRID,
};
use crate::error::{Error, Result};
use crate::extend::{
    boundary_agreement, check_injective, extend_plane_symmetric, jacobian_report, Extension, GridSpec,
    JacobianReport, PlaneExtension, Regime, Region,
};
use crate::geom::{self, unit, Jacobian2, C64, PI, TAU};
use crate::report::CheckReport;

/// Relative tolerance of the symmetrization margin checks.
pub const MARGIN_TOL: f64 = 1e-9;
/// Relative tolerance of branch independence for de-symmetrized maps.
pub const BRANCH_TOL: f64 = 1e-8;

/// `W(re^{it}) = re^{2it}`.
pub fn winding_map(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return z;
    }
    z * z / r
}

/// `DW(z)` from `dW/dz = (3/2) e^{it}` and `dW/dzbar = -(1/2) e^{3it}`.
pub fn winding_jacobian(z: C64) -> Result<Jacobian2> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("the winding map is not differentiable at 0".into()));
    }
    let e = z / z.norm();
    Ok(Jacobian2::from_wirtinger(e * 1.5, -(e * e * e) * 0.5))
}

/// Singular values of `DW(z)`, always `(2, 1)`.
pub fn winding_jacobian_norms(z: C64) -> Result<(f64, f64)> {
    Ok(winding_jacobian(z)?.singular_values())
}

/// Square-root branch of `W^{-1}` with the cut along the positive real axis.
pub fn winding_root(w: C64) -> C64 {
    let theta = w.arg().rem_euclid(TAU);
    C64::from_polar(w.norm(), theta / 2.0)
}

/// `g` with `W o g = (f - w0) o W`, together with its source.
#[derive(Clone, Debug)]
pub struct WindingSymmetrization {
    pub source: CircleEmbedding,
    pub w0: C64,
    pub g: CircleEmbedding,
    /// `+1`; the other solution is `-g`.
    pub sign_choice: i8,
    /// `min |f - w0|` over the nodes.
    pub r_min: f64,
}

/// Winding symmetrization of `f - w0`. Nodes of `g` sit at half the
/// parameters of `f` and at their antipodes.
pub fn symmetrize(f: &CircleEmbedding, w0: C64) -> Result<WindingSymmetrization> {
    let diam = f.diam();
    let d = geom::distance_to_closed(f.points(), w0);
    if d <= 1e-12 * diam {
        return Err(Error::PointOnCurve { point: w0, distance: d });
    }
    let wind = winding_number(f, w0)?;
    if wind.abs() != 1 {
        return Err(Error::Domain(format!("curve winds {wind} times around the basepoint")));
    }
    let mut a = (f.points()[0] - w0).arg();
    let mut prev = f.points()[0] - w0;
    let mut half = Vec::with_capacity(f.len());
    let mut r_min = f64::INFINITY;
    for (t, p) in f.nodes() {
        let v = p - w0;
        a += (v / prev).arg();
        prev = v;
        r_min = r_min.min(v.norm());
        half.push((t / 2.0, C64::from_polar(v.norm(), a / 2.0)));
    }
    let mut nodes = half.clone();
    nodes.extend(half.iter().map(|(s, v)| (s + PI, -v)));
    let g = CircleEmbedding::from_nodes(nodes, true)?;
    Ok(WindingSymmetrization { source: f.clone(), w0, g, sign_choice: 1, r_min })
}

/// Symmetrization about an incenter of the curve.
pub fn symmetrize_recentred(f: &CircleEmbedding) -> Result<WindingSymmetrization> {
    let w0 = incenter(f, INCENTER_GRID)?.center;
    symmetrize(f, w0)
}

impl WindingSymmetrization {
    /// `max |W(g(e^{it})) - (f(e^{2it}) - w0)|` over the nodes of `g`.
    pub fn conjugacy_defect(&self) -> f64 {
        self.g
            .nodes()
            .map(|(s, v)| (winding_map(v) - (self.source.eval(2.0 * s) - self.w0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn g_constants(&self) -> Result<BiLipschitzReport> {
        curve_constants(&self.g, 1)
    }
}

/// Upper and lower symmetrization bounds with `r = min |f - w0|`:
/// `g` is `(pi L, r l / (2 pi L))`-bi-Lipschitz.
pub fn check_prop84(f: &BiLipschitzReport, g: &BiLipschitzReport, r_min: f64, scale: f64) -> Vec<CheckReport> {
    let tol = MARGIN_TOL * scale;
    let (big, small) = (f.upper_l, f.lower_l);
    vec![
        CheckReport::le("prop84_upper", g.upper_l, PI * big + tol),
        CheckReport::le("prop84_lower", r_min * small / (TAU * big) - tol, g.lower_l),
    ]
}

/// Incenter version: `g` is `(pi L, l^2 / (2 pi L))`-bi-Lipschitz.
pub fn check_cor85(f: &BiLipschitzReport, g: &BiLipschitzReport, scale: f64) -> Vec<CheckReport> {
    let tol = MARGIN_TOL * scale;
    let (big, small) = (f.upper_l, f.lower_l);
    vec![
        CheckReport::le("cor85_upper", g.upper_l, PI * big + tol),
        CheckReport::le("cor85_lower", small * small / (TAU * big) - tol, g.lower_l),
    ]
}

/// Inradius sandwich `l <= R_I <= L`, with the constants measured on refined samples.
pub fn check_inradius(f: &CircleEmbedding, refine: usize) -> Result<Vec<CheckReport>> {
    let k = curve_constants(f, refine)?;
    let r = incenter(f, INCENTER_GRID)?.inradius;
    let tol = MARGIN_TOL * f.diam();
    Ok(vec![
        CheckReport::le("inradius_lower", k.lower_l - tol, r),
        CheckReport::le("inradius_upper", r, k.upper_l + tol),
    ])
}

/// Symmetrization report for the `symmetrize` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub w0: C64,
    pub r_min: f64,
    pub conjugacy_defect: f64,
    pub empirical_f_constants: BiLipschitzReport,
    pub empirical_g_constants: BiLipschitzReport,
    pub prop84_margins: Vec<CheckReport>,
    pub cor85_margins: Vec<CheckReport>,
    pub inradius_margins: Vec<CheckReport>,
}

pub fn symmetrization_report(sym: &WindingSymmetrization, recentred: bool) -> Result<SymmetrizationReport> {
    let fk = curve_constants(&sym.source, 1)?;
    let gk = sym.g_constants()?;
    let scale = sym.source.diam();
    Ok(SymmetrizationReport {
        w0: sym.w0,
        r_min: sym.r_min,
        conjugacy_defect: sym.conjugacy_defect(),
        prop84_margins: check_prop84(&fk, &gk, sym.r_min, scale),
        cor85_margins: if recentred { check_cor85(&fk, &gk, scale) } else { Vec::new() },
        inradius_margins: check_inradius(&sym.source, 4)?,
        empirical_f_constants: fk,
        empirical_g_constants: gk,
    })
}

/// `F = sigma W o G o s + w0` for an odd extension `G`, where `s` is a branch of `W^{-1}`.
#[derive(Clone, Debug)]
pub struct DesymmetrizedExtension<G> {
    pub inner: G,
    pub w0: C64,
    pub sign: f64,
}

impl<G: Extension> DesymmetrizedExtension<G> {
    fn raw(&self, w: C64) -> Result<C64> {
        Ok(winding_map(self.inner.eval(winding_root(w))?))
    }

    /// Largest discrepancy between the two branches of `W^{-1}` over `points`.
    pub fn branch_defect(&self, points: &[C64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &w in points {
            let s = winding_root(w);
            worst = worst.max((winding_map(self.inner.eval(s)?) - winding_map(self.inner.eval(-s)?)).norm());
        }
        Ok(worst)
    }
}

impl<G: Extension> Extension for DesymmetrizedExtension<G> {
    fn eval(&self, w: C64) -> Result<C64> {
        Ok(self.raw(w)? * self.sign + self.w0)
    }

    fn eval_with_jacobian(&self, w: C64) -> Result<(C64, Jacobian2)> {
        let s = winding_root(w);
        let (v, jg) = self.inner.eval_with_jacobian(s)?;
        let ds = winding_jacobian(s)?
            .inverse()
            .ok_or_else(|| Error::Domain("singular winding Jacobian".into()))?;
        let j = winding_jacobian(v)?.mul(&jg).mul(&ds);
        let j = Jacobian2::new(self.sign * j.a, self.sign * j.b, self.sign * j.c, self.sign * j.d);
        Ok((winding_map(v) * self.sign + self.w0, j))
    }
}

/// Points straddling the positive real axis, where the two branches of `W^{-1}` differ.
pub fn branch_cut_points(grid: GridSpec) -> Vec<C64> {
    let eps = 1e-3;
    let mut out = Vec::new();
    for region in [Region::Inner, Region::Outer] {
        let radii: Vec<f64> = grid.points(region).iter().step_by(grid.angles).map(|z| z.norm()).collect();
        for r in radii {
            out.push(C64::from_polar(r, eps));
            out.push(C64::from_polar(r, -eps));
        }
    }
    out
}

/// Carry an odd extension `G` of `g` to an extension of the source of `sym`.
pub fn desymmetrize_extension<G: Extension>(
    inner: G,
    sym: &WindingSymmetrization,
    grid: GridSpec,
) -> Result<DesymmetrizedExtension<G>> {
    let mut ext = DesymmetrizedExtension { inner, w0: sym.w0, sign: 1.0 };
    let scale = sym.source.diam();
    let defect = ext.branch_defect(&branch_cut_points(grid))?;
    if defect > BRANCH_TOL * scale {
        return Err(Error::Symmetry(format!(
            "G not centrally symmetric enough: branch mismatch {defect:e}"
        )));
    }
    // One of F and -F extends f; vote over the nodes.
    let mut votes = 0i64;
    for (t, p) in sym.source.nodes() {
        let v = ext.raw(unit(t))?;
        let plus = (v + sym.w0 - p).norm();
        let minus = (-v + sym.w0 - p).norm();
        votes += if plus <= minus { 1 } else { -1 };
    }
    ext.sign = if votes >= 0 { 1.0 } else { -1.0 };
    Ok(ext)
}

/// Measurements of the full pipeline for an arbitrary embedding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralReport {
    pub symmetrization: SymmetrizationReport,
    pub boundary_agreement: f64,
    pub jacobian: JacobianReport,
    pub symmetric_jacobian: JacobianReport,
    pub paper_bound_margins: Vec<CheckReport>,
    /// `sup ||DF|| <= 2 sup ||DG||` and its inverse analogue on matched grids.
    pub transport_margins: Vec<CheckReport>,
    pub grid_spec: GridSpec,
}

/// Symmetrize about an incenter, extend the symmetric curve, and wind back.
pub fn extend_plane_general(
    f: &CircleEmbedding,
    grid: GridSpec,
) -> Result<(DesymmetrizedExtension<PlaneExtension>, GeneralReport)> {
    let sym = symmetrize_recentred(f)?;
    let g_ext = extend_plane_symmetric(&sym.g)?;
    let ext = desymmetrize_extension(g_ext, &sym, grid)?;

    let mut pts = grid.points(Region::Inner);
    pts.extend(grid.points(Region::Outer));
    let jac = jacobian_report(&ext, &pts)?;
    check_injective(&jac.rows, 1e-9 * f.diam())?;
    let matched: Vec<C64> = pts.iter().map(|&w| winding_root(w)).collect();
    let gjac = jacobian_report(&ext.inner, &matched)?;

    let fk = curve_constants(f, 1)?;
    let transport_margins = vec![
        CheckReport::le("transport_DF", jac.sup_norm, 2.0 * gjac.sup_norm * (1.0 + 1e-6)),
        CheckReport::le("transport_DF_inv", jac.sup_inverse_norm, 2.0 * gjac.sup_inverse_norm * (1.0 + 1e-6)),
    ];
    let report = GeneralReport {
        symmetrization: symmetrization_report(&sym, true)?,
        boundary_agreement: boundary_agreement(&ext, f)?,
        paper_bound_margins: Regime::General.margins(&jac, fk.upper_l, fk.lower_l),
        jacobian: jac,
        symmetric_jacobian: gjac,
        transport_margins,
        grid_spec: grid,
    };
    Ok((ext, report))
}

/// Empirical constants of an extension over grid samples.
pub fn grid_constants(rows: &JacobianReport, seed: u64) -> Result<BiLipschitzReport> {
    let samples: Vec<(C64, C64)> = rows.rows.iter().map(|r| (r.point, r.image)).collect();
    bilipschitz_constants(&samples, PairStrategy::Auto { seed })
}
