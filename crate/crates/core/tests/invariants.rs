use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use schoenflies::ba_ext::CircleHomeoLift;
use schoenflies::curves::{circle, make_embedding, CurveSpec, Family};
use schoenflies::extend::{extend_plane_symmetric, Extension};
use schoenflies::geom::c;
use schoenflies::harmonic::{hm_disk_exact, Arc};
use schoenflies::symmetrize::{symmetrize, winding_jacobian_norms, winding_map, winding_root};
use schoenflies::C64;

fn point(r: f64, t: f64) -> C64 {
    C64::from_polar(r, t)
}

/// Closed form: the angle the arc subtends at `z`, minus half the arc length, over pi.
fn arc_measure(z: C64, a: f64, b: f64) -> f64 {
    let ratio = (point(1.0, b) - z) / (point(1.0, a) - z);
    let mut angle = ratio.arg();
    if angle < 0.0 {
        angle += TAU;
    }
    angle / PI - (b - a) / TAU
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn winding_root_inverts_winding_map(r in 1e-3f64..1e3, t in 0.0f64..TAU) {
        let w = point(r, t);
        let back = winding_map(winding_root(w));
        prop_assert!((back - w).norm() <= 1e-12 * r);
        let z = winding_root(w);
        prop_assert!((winding_map(-z) - w).norm() <= 1e-12 * r);
        let (hi, lo) = winding_jacobian_norms(z).unwrap();
        prop_assert!((hi - 2.0).abs() < 1e-12 && (lo - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_harmonic_measure_matches_closed_form(
        r in 0.0f64..0.97,
        t in 0.0f64..TAU,
        a in -PI..PI,
        len in 0.01f64..6.2,
    ) {
        let z = point(r, t);
        let arc = Arc::new(a, a + len).unwrap();
        let rest = Arc::new(a + len, a + TAU).unwrap();
        let w = hm_disk_exact(z, &arc).unwrap().value;
        let v = hm_disk_exact(z, &rest).unwrap().value;
        prop_assert!((w - arc_measure(z, a, a + len)).abs() < 1e-9, "{w}");
        prop_assert!((w + v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lift_extension_commutes_with_translation(
        amp in 0.0f64..0.45,
        k in 1u32..4,
        x in -10.0f64..10.0,
        y in 1e-3f64..12.0,
    ) {
        let freq = 2.0 * k as f64;
        let chi = CircleHomeoLift::from_fn(128, |t| t + amp / freq * (freq * t).sin()).unwrap();
        let z = c(x, y);
        let shifted = chi.ba_extend(z + TAU).unwrap() - chi.ba_extend(z).unwrap();
        prop_assert!((shifted - TAU).norm() < 1e-9);
        let odd = chi.ba_extend(z + PI).unwrap() - chi.ba_extend(z).unwrap();
        prop_assert!((odd - PI).norm() < 1e-9);
    }

    #[test]
    fn symmetrization_is_odd_and_conjugates(
        cx in -0.8f64..0.8,
        cy in -0.8f64..0.8,
        radius in 1.0f64..3.0,
    ) {
        let f = circle(c(cx, cy), radius, 64).unwrap();
        let s = symmetrize(&f, c(0.0, 0.0)).unwrap();
        let n = s.g.len();
        let pts = s.g.points();
        for k in 0..n / 2 {
            prop_assert!((pts[k] + pts[k + n / 2]).norm() < 1e-12 * radius);
        }
        prop_assert!(s.conjugacy_defect() < 1e-9 * radius);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn symmetric_extension_is_odd_and_matches_the_curve(
        ra in 0.0f64..0.15,
        pa in 0.0f64..0.15,
        rf in 1u32..3,
        pf in 1u32..3,
        t in 0.0f64..TAU,
        r in prop::sample::select(vec![0.2, 0.7, 0.995, 1.005, 1.5, 30.0]),
    ) {
        let spec = CurveSpec::Family {
            family: Family::Trig { radial_amp: ra, radial_freq: 2 * rf, phase_amp: pa, phase_freq: 2 * pf },
            n: 128,
        };
        let f = make_embedding(&spec).unwrap();
        prop_assert!(f.is_symmetric());
        let ext = extend_plane_symmetric(&f).unwrap();
        let z = point(r, t);
        prop_assert!((ext.eval(-z).unwrap() + ext.eval(z).unwrap()).norm() < 1e-9);
        let on = ext.eval(point(1.0, t)).unwrap();
        prop_assert!((on - f.eval(t)).norm() < 1e-9);
        let (_, j) = ext.eval_with_jacobian(z).unwrap();
        prop_assert!(j.det() > 0.0);
    }
}
