//! Report records and the JSON / CSV / SVG emitters used by the CLI.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PoissonExact,
    MonteCarlo,
    Direct,
}

/// One evaluated inequality `lhs <= rhs`; `margin = rhs - lhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub method: Method,
    pub walks: u64,
    pub std_error: f64,
    pub seed: Option<u64>,
}

impl CheckReport {
    /// `lhs <= rhs` evaluated without sampling error.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            method: Method::Direct,
            walks: 0,
            std_error: 0.0,
            seed: None,
        }
    }

    pub fn with_method(mut self, method: Method, walks: u64, std_error: f64, seed: Option<u64>) -> Self {
        self.method = method;
        self.walks = walks;
        self.std_error = std_error;
        self.seed = seed;
        self
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Minimal SVG canvas with the fixed viewport rule: one unit is 200 px and the
/// data bounding box is centred in the frame.
pub struct SvgCanvas {
    width: f64,
    height: f64,
    origin: C64,
    scale: f64,
    body: String,
}

pub const PX_PER_UNIT: f64 = 200.0;

impl SvgCanvas {
    /// Canvas framing the box `[lo, hi]` with a 20 px margin.
    pub fn framing(lo: C64, hi: C64) -> Self {
        let margin = 20.0;
        let scale = PX_PER_UNIT;
        let width = (hi.re - lo.re) * scale + 2.0 * margin;
        let height = (hi.im - lo.im) * scale + 2.0 * margin;
        let centre = (lo + hi) / 2.0;
        Self { width, height, origin: centre, scale, body: String::new() }
    }

    fn px(&self, p: C64) -> (f64, f64) {
        let x = self.width / 2.0 + (p.re - self.origin.re) * self.scale;
        let y = self.height / 2.0 - (p.im - self.origin.im) * self.scale;
        (x, y)
    }

    pub fn polyline(&mut self, pts: &[C64], closed: bool, stroke: &str, width: f64) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, x, y);
        }
        if closed {
            d.push_str(" Z");
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn point(&mut self, p: C64, label: &str, color: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{color}"/>"#);
        if !label.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.3}" y="{:.3}" font-family="serif" font-size="16">{label}</text>"#,
                x + 5.0,
                y - 5.0
            );
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.3} {:.3}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width.ceil(),
            self.height.ceil(),
            self.width,
            self.height,
            self.body
        )
    }
}

/// Side-by-side panels of closed curves sharing one scale.
pub fn two_panel_svg(left: &[Vec<C64>], right: &[Vec<C64>], labels: &[(usize, C64, String)]) -> String {
    let close = |v: &[Vec<C64>]| v.iter().map(|c| (c.clone(), true)).collect::<Vec<_>>();
    panels_svg(&close(left), &close(right), labels)
}

/// Side-by-side panels of polylines, each flagged closed or open.
pub fn panels_svg(left: &[(Vec<C64>, bool)], right: &[(Vec<C64>, bool)], labels: &[(usize, C64, String)]) -> String {
    let all: Vec<C64> = left.iter().chain(right.iter()).flat_map(|(c, _)| c.iter().copied()).collect();
    let (lo, hi) = crate::geom::bounding_box(&all);
    let span = hi - lo;
    let gap = 0.25 * span.re.max(span.im);
    let shift = C64::new(span.re + gap, 0.0);
    let mut canvas = SvgCanvas::framing(lo, hi + shift);
    for (curve, closed) in left {
        canvas.polyline(curve, *closed, "black", 1.5);
    }
    for (curve, closed) in right {
        let moved: Vec<C64> = curve.iter().map(|p| p + shift).collect();
        canvas.polyline(&moved, *closed, "black", 1.5);
    }
    for (panel, p, label) in labels {
        let q = if *panel == 0 { *p } else { p + shift };
        canvas.point(q, label, "black");
    }
    canvas.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic() {
        let pts = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let a = two_panel_svg(&[pts.clone()], &[pts.clone()], &[(0, pts[0], "a".into())]);
        let b = two_panel_svg(&[pts.clone()], &[pts], &[(0, C64::new(0.0, 0.0), "a".into())]);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
    }

    #[test]
    fn check_margin_sign() {
        let r = CheckReport::le("x", 1.0, 3.0);
        assert_eq!(r.margin, 2.0);
        assert!(r.holds(0.0));
        assert!(!CheckReport::le("y", 3.0, 1.0).holds(1e-9));
    }
}
