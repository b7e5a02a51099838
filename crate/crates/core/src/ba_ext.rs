//! Circle homeomorphism lifts and their Beurling–Ahlfors type extension to the
//! upper half-plane (with doubled imaginary part), transported to the disk.

use serde::{Deserialize, Serialize};

use crate::curves::{point_set_dist, set_diam, PlanarSet};
use crate::error::{Error, Result};
use crate::geom::{c, unit, wrap_angle, Jacobian2, C64, PI, TAU};
use crate::harmonic::gamma_arcs;

/// Tolerance of the `chi(t + pi) = chi(t) + pi` detection.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

/// Strictly increasing lift `chi` of a sense-preserving circle homeomorphism,
/// piecewise linear between nodes and extended by `chi(t + 2pi) = chi(t) + 2pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LiftSpec", into = "LiftSpec")]
pub struct CircleHomeoLift {
    // Node arrays carry the wrap node `(t_0 + 2pi, chi_0 + 2pi)` at the end.
    t: Vec<f64>,
    chi: Vec<f64>,
    // prefix[k] = integral of chi over [t_0, t_k]
    prefix: Vec<f64>,
    pi_equivariant: bool,
}

/// JSON form: `{"nodes": [[t, chi], ...], "pi_equivariant": bool}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftSpec {
    pub nodes: Vec<[f64; 2]>,
    #[serde(default)]
    pub pi_equivariant: bool,
}

impl TryFrom<LiftSpec> for CircleHomeoLift {
    type Error = Error;

    fn try_from(spec: LiftSpec) -> Result<Self> {
        let lift = CircleHomeoLift::from_nodes(spec.nodes.iter().map(|p| (p[0], p[1])).collect())?;
        if spec.pi_equivariant && !lift.pi_equivariant {
            return Err(Error::Symmetry("lift claims chi(t + pi) = chi(t) + pi but does not satisfy it".into()));
        }
        Ok(lift)
    }
}

impl From<CircleHomeoLift> for LiftSpec {
    fn from(l: CircleHomeoLift) -> Self {
        LiftSpec { nodes: l.nodes().into_iter().map(|(t, x)| [t, x]).collect(), pi_equivariant: l.pi_equivariant }
    }
}

impl CircleHomeoLift {
    pub fn from_nodes(nodes: Vec<(f64, f64)>) -> Result<Self> {
        let m = nodes.len();
        if m < 2 {
            return Err(Error::InvalidInput("a lift needs at least 2 nodes".into()));
        }
        if nodes.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite lift node".into()));
        }
        if !(nodes[0].0 >= 0.0 && nodes[m - 1].0 < TAU) {
            return Err(Error::InvalidInput("lift parameters must lie in [0, 2pi)".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput(format!("lift parameters not increasing at t = {}", w[1].0)));
            }
            if !(w[1].1 > w[0].1) {
                return Err(Error::InvalidInput(format!("lift values not increasing at t = {}", w[1].0)));
            }
        }
        if !(nodes[m - 1].1 < nodes[0].1 + TAU) {
            return Err(Error::InvalidInput("lift increment over one period exceeds 2pi".into()));
        }
        let mut t: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let mut chi: Vec<f64> = nodes.iter().map(|p| p.1).collect();
        t.push(t[0] + TAU);
        chi.push(chi[0] + TAU);
        let mut prefix = vec![0.0; m + 1];
        for k in 0..m {
            prefix[k + 1] = prefix[k] + 0.5 * (chi[k] + chi[k + 1]) * (t[k + 1] - t[k]);
        }
        let mut lift = Self { t, chi, prefix, pi_equivariant: false };
        lift.pi_equivariant = lift.check_equivariance() <= EQUIVARIANCE_TOL;
        Ok(lift)
    }

    /// Nodes sampled from a closed-form lift at `m` equally spaced parameters.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_nodes((0..m).map(|k| TAU * k as f64 / m as f64).map(|t| (t, f(t))).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, |t| t).expect("identity lift is valid")
    }

    pub fn len(&self) -> usize {
        self.t.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|k| (self.t[k], self.chi[k])).collect()
    }

    pub fn is_pi_equivariant(&self) -> bool {
        self.pi_equivariant
    }

    /// Largest `|chi(t + pi) - chi(t) - pi|` over nodes and their antipodes.
    pub fn check_equivariance(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            for t in [self.t[k], self.t[k] - PI] {
                worst = worst.max((self.eval(t + PI) - self.eval(t) - PI).abs());
            }
        }
        worst
    }

    fn period(&self) -> f64 {
        self.prefix[self.len()]
    }

    /// `(j, k, s)` with `t = s + 2pi j`, `t_k <= s < t_{k+1}`.
    fn locate(&self, t: f64) -> (f64, usize, f64) {
        let t0 = self.t[0];
        let mut j = ((t - t0) / TAU).floor();
        let mut s = t - TAU * j;
        if s >= t0 + TAU {
            s -= TAU;
            j += 1.0;
        }
        if s < t0 {
            s = t0;
        }
        let k = self.t.partition_point(|&x| x <= s).saturating_sub(1).min(self.len() - 1);
        (j, k, s)
    }

    fn local(&self, k: usize, s: f64) -> f64 {
        let (ta, tb) = (self.t[k], self.t[k + 1]);
        self.chi[k] + (self.chi[k + 1] - self.chi[k]) * ((s - ta) / (tb - ta))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (j, k, s) = self.locate(t);
        self.local(k, s) + TAU * j
    }

    /// `chi^{-1}(v)`.
    pub fn inverse(&self, v: f64) -> f64 {
        let x0 = self.chi[0];
        let mut j = ((v - x0) / TAU).floor();
        let mut s = v - TAU * j;
        if s >= x0 + TAU {
            s -= TAU;
            j += 1.0;
        }
        let k = self.chi.partition_point(|&x| x <= s).saturating_sub(1).min(self.len() - 1);
        let (xa, xb) = (self.chi[k], self.chi[k + 1]);
        self.t[k] + (self.t[k + 1] - self.t[k]) * ((s - xa) / (xb - xa)) + TAU * j
    }

    /// `int_{t_0}^t chi`.
    fn antiderivative(&self, t: f64) -> f64 {
        let (j, k, s) = self.locate(t);
        let local = self.prefix[k] + 0.5 * (self.chi[k] + self.local(k, s)) * (s - self.t[k]);
        j * self.period() + 2.0 * PI * PI * j * (j - 1.0) + local + TAU * j * (s - self.t[0])
    }

    /// `int_a^b (chi - shift)`, exact for the piecewise-linear lift.
    pub fn integral(&self, a: f64, b: f64, shift: f64) -> f64 {
        if b <= a {
            return if b == a { 0.0 } else { -self.integral(b, a, shift) };
        }
        let segments = (b - a) * self.len() as f64 / TAU;
        if segments > 64.0 {
            return self.antiderivative(b) - self.antiderivative(a) - shift * (b - a);
        }
        // Walk the segments so small windows keep full relative precision.
        let (j, mut k, mut cur) = self.locate(a);
        let mut offset = TAU * j;
        let mut cur_val = self.local(k, cur) + offset - shift;
        let mut total = 0.0;
        let mut base = TAU * j;
        loop {
            let end = self.t[k + 1] + base;
            let here = cur + base;
            if end >= b {
                let v = self.local(k, b - base) + offset - shift;
                total += 0.5 * (cur_val + v) * (b - here);
                return total;
            }
            let v = self.chi[k + 1] + offset - shift;
            total += 0.5 * (cur_val + v) * (end - here);
            cur_val = v;
            k += 1;
            if k == self.len() {
                k = 0;
                base += TAU;
                offset += TAU;
            }
            cur = self.t[k];
        }
    }

    /// Increments of `chi` and integrals of `chi - chi(x)` over `[x, x+y]` and `[x-y, x]`,
    /// accumulated outward from `x` so that tiny windows keep relative precision.
    fn window(&self, x: f64, y: f64) -> Window {
        let m = self.len();
        if y * m as f64 / TAU > 128.0 {
            let cx = self.eval(x);
            return Window {
                hp: self.eval(x + y) - cx,
                hm: self.eval(x - y) - cx,
                plus: self.integral(x, x + y, cx),
                minus: self.integral(x - y, x, cx),
            };
        }
        let slope = |k: usize| (self.chi[k + 1] - self.chi[k]) / (self.t[k + 1] - self.t[k]);
        let (_, k0, s) = self.locate(x);

        let (mut k, mut pos, mut left, mut val, mut area) = (k0, s, y, 0.0, 0.0);
        loop {
            let len = (self.t[k + 1] - pos).min(left);
            let next = val + slope(k) * len;
            area += 0.5 * (val + next) * len;
            val = next;
            left -= len;
            if left <= 0.0 {
                break;
            }
            k = if k + 1 == m { 0 } else { k + 1 };
            pos = self.t[k];
        }
        let (hp, plus) = (val, area);

        let (mut k, mut pos, mut left, mut val, mut area) = (k0, s, y, 0.0, 0.0);
        loop {
            let len = (pos - self.t[k]).min(left);
            let next = val - slope(k) * len;
            area += 0.5 * (val + next) * len;
            val = next;
            left -= len;
            if left <= 0.0 {
                break;
            }
            k = if k == 0 { m - 1 } else { k - 1 };
            pos = self.t[k + 1];
        }
        Window { hp, hm: val, plus, minus: area }
    }

    /// `chi_e(x + iy) = (1/2) int_{-1}^{1} chi(x + ty)(1 + 2i sgn t) dt` in closed form.
    pub fn ba_extend(&self, z: C64) -> Result<C64> {
        let (x, y) = (z.re, z.im);
        if !(y > 0.0) {
            return Err(Error::Domain(format!("extension needs Im z > 0, got {y}")));
        }
        let cx = self.eval(x);
        let w = self.window(x, y);
        Ok(c(cx + (w.plus + w.minus) / (2.0 * y), (w.plus - w.minus) / y))
    }

    /// Partial derivatives of `chi_e` as a real 2x2 matrix in `(x, y)`.
    pub fn ba_jacobian(&self, z: C64) -> Result<Jacobian2> {
        let (x, y) = (z.re, z.im);
        if !(y > 0.0) {
            return Err(Error::Domain(format!("extension Jacobian needs Im z > 0, got {y}")));
        }
        let Window { hp, hm, plus, minus } = self.window(x, y);
        Ok(Jacobian2::new(
            (hp - hm) / (2.0 * y),
            (hp + hm - (plus + minus) / y) / (2.0 * y),
            (hp + hm) / y,
            (hp - hm) / y - (plus - minus) / (y * y),
        ))
    }

    /// Upper bounds for `||D chi_e||` and `||D chi_e^{-1}||` from the lift's increments.
    pub fn stretch_bounds(&self, z: C64) -> (f64, f64) {
        let (x, y) = (z.re, z.im);
        let max = 2.0 * (self.eval(x + y) - self.eval(x - y)) / y;
        let gap = (self.eval(x + y) - self.eval(x + y / 2.0)).min(self.eval(x - y / 2.0) - self.eval(x - y));
        (max, 4.0 * y / gap)
    }

    /// The disk map `Psi(e^{iz}) = exp(i chi_e(z))`, `Psi(0) = 0`.
    pub fn psi_disk(&self, zeta: C64) -> Result<C64> {
        let r = zeta.norm();
        if r > 1.0 + 1e-14 {
            return Err(Error::Domain(format!("Psi is defined on the closed disk, got |zeta| = {r}")));
        }
        if r == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let delta = -r.ln();
        if delta <= 0.0 {
            return Ok(unit(self.eval(zeta.arg())));
        }
        let w = self.ba_extend(c(zeta.arg(), delta))?;
        Ok((C64::i() * w).exp())
    }

    /// `D Psi` at `0 < |zeta| < 1`.
    pub fn psi_jacobian(&self, zeta: C64) -> Result<Jacobian2> {
        let r = zeta.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("Psi Jacobian needs 0 < |zeta| < 1, got {r}")));
        }
        let z = c(zeta.arg(), -r.ln());
        let psi = (C64::i() * self.ba_extend(z)?).exp();
        let inner = Jacobian2::from_holomorphic(-C64::i() / zeta);
        let outer = Jacobian2::from_holomorphic(C64::i() * psi);
        Ok(outer.mul(&self.ba_jacobian(z)?).mul(&inner))
    }

    /// Solve `Psi(zeta) = w` by Newton in half-plane coordinates, falling back
    /// to nested bisection along the level curves of `Re chi_e`.
    pub fn psi_inverse(&self, w: C64) -> Result<C64> {
        let r = w.norm();
        if r > 1.0 + 1e-14 {
            return Err(Error::Domain(format!("Psi^-1 is defined on the closed disk, got |w| = {r}")));
        }
        if r == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let target = c(w.arg(), -r.ln());
        if target.im <= 0.0 {
            return Ok(unit(self.inverse(target.re)));
        }
        let seed = c(self.inverse(target.re), target.im);
        let z = match self.newton(seed, target) {
            Some(z) => z,
            None => {
                let rough = self.bisect(target)?;
                self.newton(rough, target).unwrap_or(rough)
            }
        };
        let zeta = (C64::i() * z).exp();
        let resid = (self.psi_disk(zeta)? - w).norm();
        if resid > 1e-10 {
            return Err(Error::NonConvergence(format!(
                "Psi^-1({w}) residual {resid:e} after Newton and bisection"
            )));
        }
        Ok(zeta)
    }

    fn newton(&self, mut z: C64, target: C64) -> Option<C64> {
        let mut f = self.ba_extend(z).ok()? - target;
        for _ in 0..60 {
            if f.norm() <= 1e-13 * (1.0 + target.norm()) {
                return Some(z);
            }
            let step = self.ba_jacobian(z).ok()?.inverse()?.apply(f);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = z - step * lambda;
                if cand.im > 0.0 {
                    if let Ok(v) = self.ba_extend(cand) {
                        let fc = v - target;
                        if fc.norm() < f.norm() {
                            z = cand;
                            f = fc;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (f.norm() <= 1e-12 * (1.0 + target.norm())).then_some(z)
    }

    /// `x` with `Re chi_e(x + iy) = v` (monotone in `x`).
    fn level_x(&self, y: f64, v: f64) -> f64 {
        let x0 = self.inverse(v);
        let (mut lo, mut hi) = (x0 - y, x0 + y);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let re = self.ba_extend(c(mid, y)).map(|u| u.re).unwrap_or(v);
            if re < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn bisect(&self, target: C64) -> Result<C64> {
        let height = |y: f64| {
            let x = self.level_x(y, target.re);
            (x, self.ba_extend(c(x, y)).map(|u| u.im).unwrap_or(f64::NAN))
        };
        let mut lo = (target.im - 4.0 * PI).max(0.0);
        let mut hi = target.im + 4.0 * PI;
        while height(hi).1 < target.im {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NonConvergence("no upper bracket for Psi^-1".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (_, h) = height(mid);
            if !h.is_finite() {
                return Err(Error::NonConvergence(format!("Psi^-1 bisection hit NaN at y = {mid}")));
            }
            if h < target.im {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y = 0.5 * (lo + hi);
        Ok(c(self.level_x(y, target.re), y))
    }

    /// Measured norms of `D Psi`, `D Psi^{-1}` at `zeta` with the case-split upper bounds
    /// for centrally symmetric boundary maps.
    pub fn psi_jacobian_bounds(&self, zeta: C64) -> Result<PsiJacobianBounds> {
        if !self.pi_equivariant {
            return Err(Error::Symmetry("Psi derivative bounds need chi(t + pi) = chi(t) + pi".into()));
        }
        let r = zeta.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("Psi derivative bounds need 0 < |zeta| < 1, got {r}")));
        }
        let delta = -r.ln();
        let e4 = (4.0 * PI).exp();
        let j = self.psi_jacobian(zeta)?;
        let (norm, inverse_norm) = (j.norm(), j.inverse_norm());
        let z = c(zeta.arg(), delta);
        let dchi = self.ba_jacobian(z)?;
        let (maxstr, minstr) = self.stretch_bounds(z);
        let arcs = gamma_arcs(zeta)?;
        let sigma: Vec<PlanarSet> = arcs.iter().map(|a| self.image_of_arc(a.t_lo, a.t_hi, 256)).collect();
        let norm_bound = if r > (-PI / 4.0).exp() {
            e4 * PI * point_set_dist_sets(&sigma[0], &sigma[3]) / delta
        } else {
            20.0 * e4
        };
        let inverse_norm_bound = if r > (-TAU).exp() {
            4.0 * e4 * delta / set_diam(&sigma[1]).min(set_diam(&sigma[2]))
        } else {
            16.0 * e4
        };
        Ok(PsiJacobianBounds {
            norm,
            inverse_norm,
            norm_bound,
            inverse_norm_bound,
            chi_e_norm: dchi.norm(),
            chi_e_inverse_norm: dchi.inverse_norm(),
            maxstr_bound: maxstr,
            minstr_bound: minstr,
            modulus_ratio: self.psi_disk(zeta)?.norm() / r,
        })
    }

    /// `{e^{i chi(t)}}` sampled over `[t_lo, t_hi]`, with every node inside included.
    pub fn image_of_arc(&self, t_lo: f64, t_hi: f64, m: usize) -> PlanarSet {
        let mut ts: Vec<f64> = (0..=m).map(|k| t_lo + (t_hi - t_lo) * k as f64 / m as f64).collect();
        let (j, k, _) = self.locate(t_lo);
        let mut base = TAU * j;
        let mut k = k + 1;
        loop {
            if k == self.len() {
                k = 0;
                base += TAU;
            }
            let t = self.t[k] + base;
            if t >= t_hi {
                break;
            }
            ts.push(t);
            k += 1;
        }
        PlanarSet(ts.into_iter().map(|t| unit(self.eval(t))).collect())
    }
}

struct Window {
    hp: f64,
    hm: f64,
    plus: f64,
    minus: f64,
}

fn point_set_dist_sets(a: &PlanarSet, b: &PlanarSet) -> f64 {
    a.0.iter().map(|p| point_set_dist(*p, b)).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiJacobianBounds {
    pub norm: f64,
    pub inverse_norm: f64,
    pub norm_bound: f64,
    pub inverse_norm_bound: f64,
    pub chi_e_norm: f64,
    pub chi_e_inverse_norm: f64,
    pub maxstr_bound: f64,
    pub minstr_bound: f64,
    /// `|Psi(zeta)| / |zeta|`.
    pub modulus_ratio: f64,
}

/// Lift of sampled circle-homeomorphism values `(t_k, psi(e^{it_k}))`.
pub fn lift(samples: &[(f64, C64)]) -> Result<CircleHomeoLift> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InvalidInput("lift needs at least 2 samples".into()));
    }
    for (t, v) in samples {
        if !t.is_finite() || !(v.norm() > 0.0) || !v.norm().is_finite() {
            return Err(Error::InvalidInput(format!("bad lift sample at t = {t}")));
        }
    }
    let mut chi = Vec::with_capacity(m);
    chi.push(samples[0].1.arg());
    let mut total = 0.0;
    for k in 0..m {
        let a = samples[k].1;
        let b = samples[(k + 1) % m].1;
        let mut d = (b / a).arg();
        if d <= 0.0 {
            d += TAU;
        }
        if d <= 0.0 || d >= TAU {
            return Err(Error::InvalidInput(format!("circle map is not monotone near sample {k}")));
        }
        total += d;
        if k + 1 < m {
            chi.push(chi[k] + d);
        }
    }
    if (total - TAU).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "circle map is not sense-preserving of degree 1 (total turn {total})"
        )));
    }
    let nodes: Vec<(f64, f64)> = samples.iter().zip(&chi).map(|((t, _), x)| (*t, *x)).collect();
    let raw = CircleHomeoLift::from_nodes(nodes.clone())?;
    let shift = TAU * (raw.eval(0.0) / TAU).floor();
    if shift == 0.0 {
        return Ok(raw);
    }
    CircleHomeoLift::from_nodes(nodes.into_iter().map(|(t, x)| (t, x - shift)).collect())
}

/// `chi(0)` reduced into `[0, 2pi)`; convenience for callers normalizing rotations.
pub fn base_angle(lift: &CircleHomeoLift) -> f64 {
    wrap_angle(lift.eval(0.0))
}
