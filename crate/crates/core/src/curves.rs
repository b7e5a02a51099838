//! Sampled circle embeddings, planar point sets, and the metric measurements
//! taken on them (empirical bi-Lipschitz constants, inradius, set distances).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, c, unit, C64, PI, TAU};

/// Pair budget above which [`PairStrategy::Auto`] switches to random pairs.
pub const ALL_PAIRS_LIMIT: usize = 2_000_000;

/// Relative tolerance of the simplicity check.
const SIMPLICITY_TOL: f64 = 1e-12;

/// A sampled, piecewise-linear injective map of the unit circle into the plane.
///
/// Node `k` sends `e^{i t_k}` to `points[k]`; between nodes the map is linear
/// in the angle. Curves are always positively oriented.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleEmbedding {
    params: Vec<f64>,
    points: Vec<C64>,
    symmetric: bool,
    diam: f64,
}

/// Named curve families accepted by [`make_embedding`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum Family {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Closed polygon, parametrized proportionally to arclength.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Two triangular lobes joined through a neck of width `eps`; the left lobe
    /// is traced over a parameter arc with chord `eps`.
    Bowtie {
        eps: f64,
    },
    /// `(1 + ra sin(rf t)) exp(i (t + pa sin(pf t)))`.
    Trig {
        radial_amp: f64,
        radial_freq: u32,
        phase_amp: f64,
        phase_freq: u32,
    },
}

/// Curve input: a named family or an explicit node list `[t, re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Family {
        #[serde(flatten)]
        family: Family,
        n: usize,
    },
    Nodes {
        nodes: Vec<[f64; 3]>,
        #[serde(default)]
        symmetric: bool,
    },
}

impl CircleEmbedding {
    /// Validate and build an embedding from `(angle, point)` nodes.
    ///
    /// With `symmetric` set, node `k + n/2` must be the exact antipode of node `k`.
    pub fn from_nodes(nodes: Vec<(f64, C64)>, symmetric: bool) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 nodes, got {n}")));
        }
        let (params, points): (Vec<f64>, Vec<C64>) = nodes.into_iter().unzip();
        if params.iter().chain(points.iter().flat_map(|p| [&p.re, &p.im])).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite node".into()));
        }
        if params[0] < 0.0 || params[n - 1] >= TAU {
            return Err(Error::InvalidInput("node angles must lie in [0, 2pi)".into()));
        }
        if params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("node angles must be strictly increasing".into()));
        }
        let diam = brute_diam(&points);
        if diam == 0.0 {
            return Err(Error::InvalidInput("all nodes coincide".into()));
        }
        check_simple(&points, SIMPLICITY_TOL * diam)?;
        if geom::signed_area(&points) <= 0.0 {
            return Err(Error::InvalidInput(
                "curve must be positively oriented (counter-clockwise)".into(),
            ));
        }
        if symmetric {
            check_symmetry(&params, &points, 1e-12, 1e-12 * diam)?;
        }
        Ok(Self { params, points, symmetric, diam })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Diameter of the node set.
    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.params.iter().copied().zip(self.points.iter().copied())
    }

    /// Segment index `k` and local parameter in `[0, 1)` for angle `t`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.len();
        let t0 = self.params[0];
        let t = t0 + (t - t0).rem_euclid(TAU);
        let k = match self.params.partition_point(|&p| p <= t) {
            0 => n - 1,
            i => i - 1,
        };
        let lo = self.params[k];
        let hi = if k + 1 < n { self.params[k + 1] } else { t0 + TAU };
        let s = if t >= lo { (t - lo) / (hi - lo) } else { (t + TAU - lo) / (hi - lo) };
        (k, s)
    }

    /// Evaluate `f(e^{it})`.
    pub fn eval(&self, t: f64) -> C64 {
        let (k, s) = self.locate(t);
        let a = self.points[k];
        let b = self.points[(k + 1) % self.len()];
        a + (b - a) * s
    }

    /// Angle of the end node of segment `k`, unwrapped past `2pi` for the closing segment.
    pub fn segment_end_param(&self, k: usize) -> f64 {
        if k + 1 < self.len() {
            self.params[k + 1]
        } else {
            self.params[0] + TAU
        }
    }

    /// Curve parameter of the polyline point nearest to `w`, and that distance.
    pub fn project(&self, w: C64) -> (f64, f64) {
        let (d, k, _, s) = geom::nearest_on_closed(&self.points, w);
        let lo = self.params[k];
        let hi = self.segment_end_param(k);
        (geom::wrap_angle(lo + s * (hi - lo)), d)
    }

    /// `(e^{it}, f(e^{it}))` at every node and `refine - 1` equally spaced
    /// angles inside each segment.
    pub fn samples(&self, refine: usize) -> Vec<(C64, C64)> {
        let refine = refine.max(1);
        let n = self.len();
        let mut out = Vec::with_capacity(n * refine);
        for k in 0..n {
            let lo = self.params[k];
            let hi = self.segment_end_param(k);
            let a = self.points[k];
            let b = self.points[(k + 1) % n];
            for j in 0..refine {
                let s = j as f64 / refine as f64;
                out.push((unit(lo + s * (hi - lo)), a + (b - a) * s));
            }
        }
        out
    }

    pub fn polyline(&self) -> PlanarSet {
        PlanarSet(self.points.clone())
    }

    /// `f - w`; keeps the symmetry flag only for `w = 0`.
    pub fn translated(&self, w: C64) -> CircleEmbedding {
        CircleEmbedding {
            params: self.params.clone(),
            points: self.points.iter().map(|p| p - w).collect(),
            symmetric: self.symmetric && w == C64::new(0.0, 0.0),
            diam: self.diam,
        }
    }

    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec::Nodes {
            nodes: self.nodes().map(|(t, p)| [t, p.re, p.im]).collect(),
            symmetric: self.symmetric,
        }
    }
}

pub(crate) fn brute_diam(points: &[C64]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm_sqr());
        }
    }
    best.sqrt()
}

pub(crate) fn check_simple(points: &[C64], tol: f64) -> Result<()> {
    let n = points.len();
    for i in 0..n {
        if (points[(i + 1) % n] - points[i]).norm() <= tol {
            return Err(Error::InvalidInput(format!("nodes {i} and {} coincide", (i + 1) % n)));
        }
    }
    let boxes: Vec<(C64, C64)> = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            (c(a.re.min(b.re) - tol, a.im.min(b.im) - tol), c(a.re.max(b.re) + tol, a.im.max(b.im) + tol))
        })
        .collect();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (lo1, hi1) = boxes[i];
            let (lo2, hi2) = boxes[j];
            if lo1.re > hi2.re || lo2.re > hi1.re || lo1.im > hi2.im || lo2.im > hi1.im {
                continue;
            }
            if geom::segments_intersect(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n], tol) {
                return Err(Error::SelfIntersection { first: i, second: j });
            }
        }
    }
    Ok(())
}

fn check_symmetry(params: &[f64], points: &[C64], ttol: f64, ptol: f64) -> Result<()> {
    let n = params.len();
    if n % 2 != 0 {
        return Err(Error::Symmetry(format!("odd node count {n}")));
    }
    let h = n / 2;
    for k in 0..h {
        if (params[k + h] - params[k] - PI).abs() > ttol {
            return Err(Error::Symmetry(format!("node {} is not at angle t_{k} + pi", k + h)));
        }
        if (points[k + h] + points[k]).norm() > ptol {
            return Err(Error::Symmetry(format!("node {} is not the antipode of node {k}", k + h)));
        }
    }
    Ok(())
}

/// Overwrite the second half of the nodes with exact antipodes of the first half.
fn enforce_symmetry(params: &mut [f64], points: &mut [C64]) {
    let h = params.len() / 2;
    for k in 0..h {
        params[k + h] = params[k] + PI;
        points[k + h] = -points[k];
    }
}

fn uniform_params(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Nodes along an open path at `count` uniform arclength steps, plus every
/// interior vertex, mapped onto parameters `[t_lo, t_hi)`.
fn path_nodes(vertices: &[C64], count: usize, t_lo: f64, t_hi: f64) -> Vec<(f64, C64)> {
    let seg_len: Vec<f64> = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total: f64 = seg_len.iter().sum();
    let mut cum = vec![0.0];
    for l in &seg_len {
        cum.push(cum.last().unwrap() + l);
    }
    let mut arcs: Vec<f64> = (0..count).map(|k| total * k as f64 / count as f64).collect();
    arcs.extend(cum[1..cum.len() - 1].iter().copied());
    arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    arcs.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * total);
    arcs.into_iter()
        .map(|s| {
            let i = (cum.partition_point(|&x| x <= s) - 1).min(seg_len.len() - 1);
            let local = if seg_len[i] > 0.0 { (s - cum[i]) / seg_len[i] } else { 0.0 };
            let p = vertices[i] + (vertices[i + 1] - vertices[i]) * local;
            (t_lo + (t_hi - t_lo) * s / total, p)
        })
        .collect()
}

fn to_c(v: [f64; 2]) -> C64 {
    c(v[0], v[1])
}

/// Build an embedding from a family description or an explicit node list.
pub fn make_embedding(spec: &CurveSpec) -> Result<CircleEmbedding> {
    match spec {
        CurveSpec::Nodes { nodes, symmetric } => CircleEmbedding::from_nodes(
            nodes.iter().map(|v| (v[0], c(v[1], v[2]))).collect(),
            *symmetric,
        ),
        CurveSpec::Family { family, n } => make_family(family, *n),
    }
}

fn make_family(family: &Family, n: usize) -> Result<CircleEmbedding> {
    if n < 16 {
        return Err(Error::InvalidInput(format!("sample count must be at least 16, got {n}")));
    }
    let (mut params, mut points, claims_symmetric): (Vec<f64>, Vec<C64>, bool) = match family {
        Family::Circle { center, radius } => {
            if *radius <= 0.0 {
                return Err(Error::InvalidInput("circle radius must be positive".into()));
            }
            let cen = to_c(*center);
            let ts = uniform_params(n);
            let ps = ts.iter().map(|&t| cen + unit(t) * *radius).collect();
            (ts, ps, cen == c(0.0, 0.0))
        }
        Family::Ellipse { a, b } => {
            if *a <= 0.0 || *b <= 0.0 {
                return Err(Error::InvalidInput("ellipse semi-axes must be positive".into()));
            }
            let ts = uniform_params(n);
            let ps = ts.iter().map(|&t| c(a * t.cos(), b * t.sin())).collect();
            (ts, ps, true)
        }
        Family::Polygon { vertices } => {
            if vertices.len() < 3 {
                return Err(Error::InvalidInput("polygon needs at least 3 vertices".into()));
            }
            let mut vs: Vec<C64> = vertices.iter().map(|v| to_c(*v)).collect();
            vs.push(vs[0]);
            let (ts, ps): (Vec<f64>, Vec<C64>) = path_nodes(&vs, n, 0.0, TAU).into_iter().unzip();
            let m = vertices.len();
            let symmetric = m % 2 == 0
                && (0..m / 2).all(|k| (to_c(vertices[k]) + to_c(vertices[k + m / 2])).norm() < 1e-12);
            (ts, ps, symmetric)
        }
        Family::Bowtie { eps } => {
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(Error::InvalidInput("bowtie eps must lie in (0, 1)".into()));
            }
            let h = eps / 2.0;
            let split = 2.0 * (eps / 2.0).asin();
            let fast = [c(0.0, h), c(-1.0, 1.0), c(-1.0, -1.0), c(0.0, -h)];
            let slow = [c(0.0, -h), c(1.0, -1.0), c(1.0, 1.0), c(0.0, h)];
            let mut nodes = path_nodes(&fast, n / 2, 0.0, split);
            nodes.extend(path_nodes(&slow, n - n / 2, split, TAU));
            let (ts, ps) = nodes.into_iter().unzip();
            (ts, ps, false)
        }
        Family::Trig { radial_amp, radial_freq, phase_amp, phase_freq } => {
            let ts = uniform_params(n);
            let ps = ts
                .iter()
                .map(|&t| {
                    let r = 1.0 + radial_amp * (*radial_freq as f64 * t).sin();
                    C64::from_polar(r, t + phase_amp * (*phase_freq as f64 * t).sin())
                })
                .collect();
            (ts, ps, radial_freq % 2 == 0 && phase_freq % 2 == 0)
        }
    };
    let mut symmetric = false;
    if claims_symmetric && params.len() % 2 == 0 {
        let scale = brute_diam(&points);
        if check_symmetry(&params, &points, 1e-9, 1e-9 * scale).is_ok() {
            enforce_symmetry(&mut params, &mut points);
            symmetric = true;
        }
    }
    CircleEmbedding::from_nodes(params.into_iter().zip(points).collect(), symmetric)
}

/// Convenience constructor for `center + radius e^{it}` at `n` uniform angles.
pub fn circle(center: C64, radius: f64, n: usize) -> Result<CircleEmbedding> {
    make_family(&Family::Circle { center: [center.re, center.im], radius }, n)
}

pub fn ellipse(a: f64, b: f64, n: usize) -> Result<CircleEmbedding> {
    make_family(&Family::Ellipse { a, b }, n)
}

/// Winding number of the curve about `p`.
pub fn winding_number(curve: &CircleEmbedding, p: C64) -> Result<i64> {
    let d = geom::distance_to_closed(curve.points(), p);
    if d <= 1e-10 * curve.diam() {
        return Err(Error::PointOnCurve { point: p, distance: d });
    }
    Ok(geom::winding_closed(curve.points(), p))
}

/// A finite point set standing in for an arc or boundary piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarSet(pub Vec<C64>);

impl PlanarSet {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[C64] {
        &self.0
    }
}

/// Minimum distance between two sets by exhaustive pairs.
pub fn set_dist(a: &PlanarSet, b: &PlanarSet) -> f64 {
    let mut best = f64::INFINITY;
    for p in &a.0 {
        for q in &b.0 {
            best = best.min((p - q).norm_sqr());
        }
    }
    best.sqrt()
}

pub fn set_diam(a: &PlanarSet) -> f64 {
    brute_diam(&a.0)
}

pub fn point_set_dist(p: C64, set: &PlanarSet) -> f64 {
    set.0.iter().map(|q| (p - q).norm_sqr()).fold(f64::INFINITY, f64::min).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub domain: [C64; 2],
    pub image: [C64; 2],
}

impl PointPair {
    pub fn ratio(&self) -> f64 {
        (self.image[0] - self.image[1]).norm() / (self.domain[0] - self.domain[1]).norm()
    }
}

/// Empirical Lipschitz constants over a set of tested pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiLipschitzReport {
    pub upper_l: f64,
    pub lower_l: f64,
    pub argmax_pair: PointPair,
    pub argmin_pair: PointPair,
    pub num_pairs_tested: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairStrategy {
    AllPairs,
    Random { budget: usize, seed: u64 },
    /// All pairs up to [`ALL_PAIRS_LIMIT`], random pairs beyond.
    Auto { seed: u64 },
}

/// Max and min of `|f(a) - f(b)| / |a - b|` over sample pairs.
pub fn bilipschitz_constants(samples: &[(C64, C64)], strategy: PairStrategy) -> Result<BiLipschitzReport> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let total_pairs = n * (n - 1) / 2;
    let strategy = match strategy {
        PairStrategy::Auto { seed } if total_pairs > ALL_PAIRS_LIMIT => {
            PairStrategy::Random { budget: ALL_PAIRS_LIMIT, seed }
        }
        PairStrategy::Auto { .. } => PairStrategy::AllPairs,
        s => s,
    };
    let mut acc = PairAccumulator::new();
    match strategy {
        PairStrategy::AllPairs | PairStrategy::Auto { .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    acc.push(samples[i], samples[j])?;
                }
            }
        }
        PairStrategy::Random { budget, seed } => {
            // Duplicates are checked exhaustively only in the all-pairs branch;
            // here a sorted sweep catches them.
            let mut keys: Vec<(f64, f64)> = samples.iter().map(|s| (s.0.re, s.0.im)).collect();
            keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if keys.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput("duplicate domain points".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                acc.push(samples[i], samples[j])?;
            }
        }
    }
    Ok(acc.finish())
}

struct PairAccumulator {
    max: (f64, Option<PointPair>),
    min: (f64, Option<PointPair>),
    count: u64,
}

impl PairAccumulator {
    fn new() -> Self {
        Self { max: (f64::NEG_INFINITY, None), min: (f64::INFINITY, None), count: 0 }
    }

    fn push(&mut self, a: (C64, C64), b: (C64, C64)) -> Result<()> {
        let dd = (a.0 - b.0).norm();
        if dd == 0.0 {
            return Err(Error::InvalidInput(format!("duplicate domain point {}", a.0)));
        }
        let r = (a.1 - b.1).norm() / dd;
        let pair = PointPair { domain: [a.0, b.0], image: [a.1, b.1] };
        if r > self.max.0 {
            self.max = (r, Some(pair));
        }
        if r < self.min.0 {
            self.min = (r, Some(pair));
        }
        self.count += 1;
        Ok(())
    }

    fn finish(self) -> BiLipschitzReport {
        BiLipschitzReport {
            upper_l: self.max.0,
            lower_l: self.min.0,
            argmax_pair: self.max.1.unwrap(),
            argmin_pair: self.min.1.unwrap(),
            num_pairs_tested: self.count,
        }
    }
}

/// Empirical constants of the curve on its nodes and `refine - 1` extra samples per segment.
pub fn curve_constants(curve: &CircleEmbedding, refine: usize) -> Result<BiLipschitzReport> {
    bilipschitz_constants(&curve.samples(refine), PairStrategy::Auto { seed: 0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncenterReport {
    pub center: C64,
    pub inradius: f64,
}

/// Default coarse grid size of the incenter search.
pub const INCENTER_GRID: usize = 128;

/// Center and radius of a largest inscribed disk.
///
/// Coarse grid search over the bounding box, three local refinement levels
/// shrinking the cell by 4 each, then a compass search.
pub fn incenter(curve: &CircleEmbedding, grid_resolution: usize) -> Result<IncenterReport> {
    let pts = curve.points();
    let m = grid_resolution.max(4);
    let (lo, hi) = geom::bounding_box(pts);
    let inside = |p: C64| geom::winding_closed(pts, p) != 0;
    let score = |p: C64| geom::distance_to_closed(pts, p);
    // Better score wins; ties go to the lexicographically smaller point.
    let better = |s: f64, p: C64, best: &(f64, C64)| {
        s > best.0 || (s == best.0 && (p.re, p.im) < (best.1.re, best.1.im))
    };

    let mut best = (f64::NEG_INFINITY, c(0.0, 0.0));
    let cell = c((hi.re - lo.re) / m as f64, (hi.im - lo.im) / m as f64);
    for i in 0..m {
        for j in 0..m {
            let p = c(lo.re + (i as f64 + 0.5) * cell.re, lo.im + (j as f64 + 0.5) * cell.im);
            if inside(p) {
                let s = score(p);
                if better(s, p, &best) {
                    best = (s, p);
                }
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NonConvergence("incenter grid found no interior point".into()));
    }
    let mut cell = cell;
    for _ in 0..3 {
        let centre = best.1;
        let fine = cell / 4.0;
        for i in -8i32..=8 {
            for j in -8i32..=8 {
                let p = centre + c(i as f64 * fine.re, j as f64 * fine.im);
                if inside(p) {
                    let s = score(p);
                    if better(s, p, &best) {
                        best = (s, p);
                    }
                }
            }
        }
        cell = fine;
    }
    let mut step = cell.re.max(cell.im);
    let floor = 1e-13 * curve.diam();
    let dirs = [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 1.0), c(-1.0, -1.0)];
    while step > floor {
        let mut moved = false;
        for d in dirs {
            let p = best.1 + d * step;
            if inside(p) {
                let s = score(p);
                if s > best.0 {
                    best = (s, p);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(IncenterReport { center: best.1, inradius: best.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_nodes_are_unit_points() {
        let f = circle(c(0.0, 0.0), 1.0, 64).unwrap();
        assert!(f.is_symmetric());
        for (t, p) in f.nodes() {
            assert!((p - unit(t)).norm() < 1e-15);
        }
        assert!((f.eval(0.3) - f.eval(0.3 + TAU)).norm() < 1e-15);
    }

    #[test]
    fn translated_circle_is_not_symmetric() {
        let f = circle(c(0.9, 0.0), 1.0, 64).unwrap();
        assert!(!f.is_symmetric());
        assert!((f.points()[0] - c(1.9, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ellipse_is_symmetric_and_simple() {
        let f = ellipse(2.0, 1.0, 256).unwrap();
        assert!(f.is_symmetric());
        assert_eq!(f.len(), 256);
        assert!((f.diam() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn self_intersection_reports_segments() {
        let nodes = vec![
            (0.0, c(0.0, 0.0)),
            (1.0, c(1.0, 1.0)),
            (2.0, c(1.0, 0.0)),
            (3.0, c(0.0, 1.0)),
        ];
        match CircleEmbedding::from_nodes(nodes, false) {
            Err(Error::SelfIntersection { first, second }) => assert_eq!((first, second), (0, 2)),
            other => panic!("expected self-intersection, got {other:?}"),
        }
    }

    #[test]
    fn clockwise_is_rejected() {
        let nodes = (0..16).map(|k| {
            let t = TAU * k as f64 / 16.0;
            (t, unit(-t))
        });
        assert!(CircleEmbedding::from_nodes(nodes.collect(), false).is_err());
    }

    #[test]
    fn symmetric_flag_requires_antipodes() {
        let mut nodes: Vec<(f64, C64)> = (0..16).map(|k| {
            let t = TAU * k as f64 / 16.0;
            (t, unit(t))
        }).collect();
        assert!(CircleEmbedding::from_nodes(nodes.clone(), true).is_ok());
        nodes[9].1 *= 1.01;
        assert!(matches!(CircleEmbedding::from_nodes(nodes, true), Err(Error::Symmetry(_))));
    }

    #[test]
    fn winding_numbers() {
        let f = circle(c(0.0, 0.0), 1.0, 64).unwrap();
        assert_eq!(winding_number(&f, c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&f, c(3.0, 0.0)).unwrap(), 0);
        assert!(matches!(winding_number(&f, c(1.0, 0.0)), Err(Error::PointOnCurve { .. })));
        let g = circle(c(0.9, 0.0), 1.0, 64).unwrap();
        assert_eq!(winding_number(&g, c(0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn constants_of_identity_and_scaling() {
        let f = circle(c(0.0, 0.0), 1.0, 64).unwrap();
        let rep = curve_constants(&f, 1).unwrap();
        assert!((rep.upper_l - 1.0).abs() < 1e-12 && (rep.lower_l - 1.0).abs() < 1e-12);
        let scaled: Vec<(C64, C64)> = f.samples(1).into_iter().map(|(a, b)| (a, b * 2.0)).collect();
        let rep = bilipschitz_constants(&scaled, PairStrategy::AllPairs).unwrap();
        assert!((rep.upper_l - 2.0).abs() < 1e-12 && (rep.lower_l - 2.0).abs() < 1e-12);
        assert_eq!(rep.num_pairs_tested, 64 * 63 / 2);
        // witnesses reproduce the reported ratios
        assert!((rep.argmax_pair.ratio() - rep.upper_l).abs() < 1e-15);
        assert!((rep.argmin_pair.ratio() - rep.lower_l).abs() < 1e-15);
    }

    #[test]
    fn duplicate_domain_points_rejected() {
        let s = vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(1.0, 0.0), c(1.0, 0.0))];
        assert!(bilipschitz_constants(&s, PairStrategy::AllPairs).is_err());
        assert!(bilipschitz_constants(&s, PairStrategy::Random { budget: 10, seed: 1 }).is_err());
    }

    #[test]
    fn set_metrics() {
        let a = PlanarSet::new(vec![c(0.0, 0.0)]).unwrap();
        let b = PlanarSet::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_eq!(set_dist(&a, &b), 3.0);
        let tri = PlanarSet::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!((set_diam(&tri) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(set_dist(&tri, &tri), 0.0);
        assert!(PlanarSet::new(vec![]).is_err());
    }

    #[test]
    fn incenter_of_ellipse() {
        let f = ellipse(2.0, 1.0, 256).unwrap();
        let rep = incenter(&f, INCENTER_GRID).unwrap();
        // oracle: dense scan of the distance from the centre to the polyline
        let oracle = geom::distance_to_closed(f.points(), c(0.0, 0.0));
        assert!(rep.center.norm() < 1e-3, "{:?}", rep);
        assert!((rep.inradius - 1.0).abs() < 1e-3);
        assert!(rep.inradius >= oracle - 1e-12);
    }

    #[test]
    fn incenter_of_translated_circle() {
        let f = circle(c(0.9, 0.0), 1.0, 4096).unwrap();
        let rep = incenter(&f, INCENTER_GRID).unwrap();
        assert!((rep.center - c(0.9, 0.0)).norm() < 1e-6, "{:?}", rep);
        assert!((rep.inradius - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = r#"{"family": "circle", "params": {"center": [0.9, 0.0], "radius": 1.0}, "n": 64}"#;
        let spec: CurveSpec = serde_json::from_str(s).unwrap();
        let f = make_embedding(&spec).unwrap();
        assert_eq!(f.len(), 64);
        let back = make_embedding(&f.to_spec()).unwrap();
        assert_eq!(back, f);
        let raw = r#"{"nodes": [[0.0, 1.0, 0.0], [2.0, -0.5, 0.8], [4.0, -0.5, -0.8]]}"#;
        let spec: CurveSpec = serde_json::from_str(raw).unwrap();
        assert_eq!(make_embedding(&spec).unwrap().len(), 3);
    }

    #[test]
    fn polygon_keeps_corners() {
        let spec = Family::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] };
        let f = make_family(&spec, 64).unwrap();
        assert!(f.is_symmetric());
        assert_eq!(f.len(), 64);
        for v in [c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)] {
            assert!(f.points().iter().any(|p| (p - v).norm() < 1e-12));
        }
    }

    #[test]
    fn bowtie_neck_chord() {
        let f = make_family(&Family::Bowtie { eps: 0.1 }, 256).unwrap();
        let a = f.points()[0];
        let k = f.points().iter().position(|p| (p - c(0.0, -0.05)).norm() < 1e-12).unwrap();
        let chord = (unit(f.params()[0]) - unit(f.params()[k])).norm();
        assert!((chord - 0.1).abs() < 1e-12);
        assert!(((a - f.points()[k]).norm() - 0.1).abs() < 1e-12);
    }
}
