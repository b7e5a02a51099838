//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schoenflies::ba_ext::CircleHomeoLift;
use schoenflies::conformal::exterior_map;
use schoenflies::curves::{
    circle, curve_constants, ellipse, make_embedding, winding_number, CircleEmbedding, CurveSpec, Family,
};
use schoenflies::extend::{
    extend_disk, extend_plane_symmetric, extension_report, Extension, GridSpec, Regime, Region,
};
use schoenflies::geom::c;
use schoenflies::report::CheckReport;
use schoenflies::symmetrize::{
    extend_plane_general, symmetrization_report, symmetrize, symmetrize_recentred, winding_jacobian,
    winding_map,
};
use schoenflies::verify::{
    annulus_checks, ba_checks, bn_checks, conformal_checks, holds, lowerharm_checks, DEFAULT_TOLERANCE,
};
use schoenflies::C64;

const SEED: u64 = 42;

struct Line {
    pass: bool,
    detail: String,
}

impl Line {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Line { pass, detail: detail.into() }
    }
}

fn violations(checks: &[CheckReport]) -> usize {
    checks.iter().filter(|r| !holds(r, DEFAULT_TOLERANCE)).count()
}

fn grid_points() -> Vec<C64> {
    let grid = GridSpec::default();
    let mut pts = grid.points(Region::Inner);
    pts.extend(grid.points(Region::Outer));
    pts
}

fn rotated_circle(alpha: f64, n: usize) -> CircleEmbedding {
    let nodes = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            (t, C64::from_polar(1.0, t + alpha))
        })
        .collect();
    CircleEmbedding::from_nodes(nodes, true).unwrap()
}

fn family(family: Family, n: usize) -> CircleEmbedding {
    make_embedding(&CurveSpec::Family { family, n }).unwrap()
}

fn exactness() -> Line {
    let n = 256;
    let cases: Vec<(String, CircleEmbedding, C64)> = vec![
        ("identity".into(), circle(c(0.0, 0.0), 1.0, n).unwrap(), c(1.0, 0.0)),
        ("rotation 0.7".into(), rotated_circle(0.7, n), C64::from_polar(1.0, 0.7)),
        ("rotation 2.5".into(), rotated_circle(2.5, n), C64::from_polar(1.0, 2.5)),
        ("scale 2".into(), circle(c(0.0, 0.0), 2.0, n).unwrap(), c(2.0, 0.0)),
        ("scale 0.5".into(), circle(c(0.0, 0.0), 0.5, n).unwrap(), c(0.5, 0.0)),
    ];
    let pts = grid_points();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f, a) in cases {
        let start = Instant::now();
        let err = extend_plane_symmetric(&f).and_then(|ext| {
            pts.iter().try_fold(0.0f64, |worst, &z| {
                Ok(worst.max((ext.eval(z)? - a * z).norm() / (a.norm() * z.norm().max(1.0))))
            })
        });
        let secs = start.elapsed().as_secs_f64();
        match err {
            Ok(e) => {
                pass &= e <= 1e-6 && secs < 10.0;
                parts.push(format!("{name} {e:.1e} in {secs:.1}s"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Line::new(pass, parts.join(", "))
}

fn translated_circle_anchor() -> Line {
    let f = circle(c(0.9, 0.0), 1.0, 128).unwrap();
    let s = match symmetrize(&f, c(0.0, 0.0)) {
        Ok(s) => s,
        Err(e) => return Line::new(false, e.to_string()),
    };
    let (gp, gm) = (s.g.eval(FRAC_PI_2), s.g.eval(3.0 * FRAC_PI_2));
    let pair = (gp - gm).norm() / (unit(FRAC_PI_2) - unit(3.0 * FRAC_PI_2)).norm();
    let lower = s.g_constants().map(|k| k.lower_l).unwrap_or(f64::NAN);
    let pass = (gp.norm() - 0.1).abs() <= 1e-9
        && (gm.norm() - 0.1).abs() <= 1e-9
        && (pair - 0.1).abs() <= 1e-9
        && lower <= 0.1 + 1e-9;
    Line::new(
        pass,
        format!("|g(i)| = {:.12}, |g(-i)| = {:.12}, pair ratio {pair:.12}, lower constant {lower:.6}", gp.norm(), gm.norm()),
    )
}

fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

fn lower_harmonic() -> Line {
    let start = Instant::now();
    match lowerharm_checks(200, SEED, false) {
        Ok(checks) => {
            let secs = start.elapsed().as_secs_f64();
            let bad = violations(&checks);
            Line::new(bad == 0 && secs < 30.0, format!("{} checks, {bad} violations, {secs:.1}s", checks.len()))
        }
        Err(e) => Line::new(false, e.to_string()),
    }
}

fn beurling_nevanlinna() -> Line {
    let start = Instant::now();
    match bn_checks(50, 100_000, SEED) {
        Ok(checks) => {
            let secs = start.elapsed().as_secs_f64();
            let bad = violations(&checks);
            Line::new(bad == 0 && secs < 300.0, format!("{} checks, {bad} beyond 3 sigma, {secs:.1}s", checks.len()))
        }
        Err(e) => Line::new(false, e.to_string()),
    }
}

fn random_lift(rng: &mut ChaCha8Rng) -> CircleHomeoLift {
    let k1 = 2 * rng.random_range(1..4) as u32;
    let k2 = 2 * rng.random_range(1..6) as u32;
    let share = rng.random_range(0.0..0.95);
    let split = rng.random_range(0.0..1.0);
    let a1 = share * split / k1 as f64;
    let a2 = share * (1.0 - split) / k2 as f64;
    let phase = rng.random_range(0.0..TAU);
    CircleHomeoLift::from_fn(256, |t| t + a1 * (k1 as f64 * t).sin() + a2 * (k2 as f64 * t + phase).sin()).unwrap()
}

fn beurling_ahlfors() -> Line {
    let id = CircleHomeoLift::identity(64);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut id_err = 0.0f64;
    for _ in 0..1000 {
        let z = c(rng.random_range(-10.0..10.0), rng.random_range(1e-3..20.0));
        id_err = id_err.max((id.ba_extend(z).unwrap() - z).norm() / z.norm().max(1.0));
    }

    let mut checks = Vec::new();
    let mut fd_err = 0.0f64;
    for k in 0..100 {
        let chi = random_lift(&mut rng);
        match ba_checks(&chi, 100, SEED + k) {
            Ok(mut c) => checks.append(&mut c),
            Err(e) => return Line::new(false, e.to_string()),
        }
        for _ in 0..10 {
            let z = c(rng.random_range(0.0..TAU), rng.random_range(0.05..4.0 * PI));
            let j = chi.ba_jacobian(z).unwrap();
            let h = 1e-6 * z.im;
            let dx = (chi.ba_extend(z + h).unwrap() - chi.ba_extend(z - h).unwrap()) / (2.0 * h);
            let dy = (chi.ba_extend(z + c(0.0, h)).unwrap() - chi.ba_extend(z - c(0.0, h)).unwrap()) / (2.0 * h);
            let scale = j.norm();
            let diff = [j.a - dx.re, j.c - dx.im, j.b - dy.re, j.d - dy.im];
            fd_err = fd_err.max(diff.iter().fold(0.0f64, |m, d| m.max(d.abs())) / scale);
        }
    }
    let imext: Vec<_> = checks.iter().filter(|r| r.name == "imext").cloned().collect();
    let stretch: Vec<_> = checks.iter().filter(|r| r.name == "maxstr" || r.name == "minstr").cloned().collect();
    let (bad_im, bad_str) = (violations(&imext), violations(&stretch));
    Line::new(
        id_err <= 1e-12 && bad_im == 0 && bad_str == 0 && fd_err <= 1e-6,
        format!(
            "identity error {id_err:.1e}, {} imaginary-part samples ({bad_im} violations), stretch {bad_str} violations, Jacobian vs finite differences {fd_err:.1e}",
            imext.len()
        ),
    )
}

/// Symmetric corpus curves (name, curve).
fn symmetric_corpus() -> Vec<(&'static str, CircleEmbedding)> {
    vec![
        ("circle", circle(c(0.0, 0.0), 1.0, 256).unwrap()),
        ("circle r=2", circle(c(0.0, 0.0), 2.0, 256).unwrap()),
        ("circle r=0.5", circle(c(0.0, 0.0), 0.5, 256).unwrap()),
        ("ellipse 2:1", ellipse(2.0, 1.0, 256).unwrap()),
        (
            "trig 0.1/4 0.1/2",
            family(Family::Trig { radial_amp: 0.1, radial_freq: 4, phase_amp: 0.1, phase_freq: 2 }, 256),
        ),
        (
            "trig 0.2/2 0.05/4",
            family(Family::Trig { radial_amp: 0.2, radial_freq: 2, phase_amp: 0.05, phase_freq: 4 }, 256),
        ),
    ]
}

fn general_corpus() -> Vec<(&'static str, CircleEmbedding)> {
    vec![
        ("translated circle", circle(c(0.9, 0.0), 1.0, 128).unwrap()),
        ("bowtie 0.1", family(Family::Bowtie { eps: 0.1 }, 128)),
    ]
}

fn modulus_bounds() -> Line {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for k in 0..20 {
        match ba_checks(&random_lift(&mut rng), 100, SEED + 100 + k) {
            Ok(c) => checks.extend(c.into_iter().filter(|r| r.name == "modext")),
            Err(e) => return Line::new(false, e.to_string()),
        }
    }
    for (name, f) in symmetric_corpus() {
        match annulus_checks(&f) {
            Ok(c) => checks.extend(c),
            Err(e) => return Line::new(false, format!("{name}: {e}")),
        }
    }
    let bad = violations(&checks);
    Line::new(bad == 0, format!("{} checks, {bad} violations", checks.len()))
}

fn conformal_sandwiches() -> Line {
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for (name, f) in symmetric_corpus().into_iter().chain(general_corpus()) {
        match conformal_checks(&f) {
            Ok(c) => checks.extend(c),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let bad = violations(&checks);
    let cap = |f: &CircleEmbedding| exterior_map(f, 1).ok().and_then(|m| m.capacity());
    let unit_cap = cap(&circle(c(0.0, 0.0), 1.0, 256).unwrap());
    let big_cap = cap(&circle(c(0.3, -0.2), 3.0, 256).unwrap());
    let thin_cap = cap(&ellipse(2.0, 0.01, 2048).unwrap());
    let cap_ok = unit_cap.is_some_and(|v| (v - 1.0).abs() <= 1e-9)
        && big_cap.is_some_and(|v| (v - 3.0).abs() <= 3e-9)
        && thin_cap.is_some_and(|v| (v - 1.0).abs() <= 0.02);
    let mut detail = format!(
        "{} checks, {bad} violations; capacities {unit_cap:?} (circle 1), {big_cap:?} (circle 3), {thin_cap:?} (ellipse 2:0.01)",
        checks.len()
    );
    for f in &failures {
        detail.push_str(&format!("; {f}"));
    }
    Line::new(bad == 0 && failures.is_empty() && cap_ok, detail)
}

struct CorpusRun {
    margins: Vec<(String, Vec<CheckReport>)>,
    agreement: Vec<(String, f64, f64)>,
    failures: Vec<String>,
    secs: f64,
}

fn corpus_run() -> CorpusRun {
    let start = Instant::now();
    let grid = GridSpec::default();
    let mut run = CorpusRun { margins: Vec::new(), agreement: Vec::new(), failures: Vec::new(), secs: 0.0 };
    for (name, f) in symmetric_corpus() {
        let result = (|| {
            let fk = curve_constants(&f, 1)?;
            let disk = extend_disk(&f)?;
            let (dr, _) = extension_report(&disk, &f, &fk, grid, Regime::Disk, SEED)?;
            let plane = extend_plane_symmetric(&f)?;
            let (pr, _) = extension_report(&plane, &f, &fk, grid, Regime::Symmetric, SEED)?;
            Ok::<_, schoenflies::Error>((dr, pr))
        })();
        match result {
            Ok((dr, pr)) => {
                run.margins.push((format!("{name} (disk)"), dr.paper_bound_margins));
                run.margins.push((format!("{name} (plane)"), pr.paper_bound_margins));
                run.agreement.push((name.to_string(), pr.boundary_agreement, 1e-3 * f.diam()));
            }
            Err(e) => run.failures.push(format!("{name}: {e}")),
        }
    }
    for (name, f) in general_corpus() {
        let result = (|| {
            let fk = curve_constants(&f, 1)?;
            let (ext, _) = extend_plane_general(&f, grid)?;
            let (r, _) = extension_report(&ext, &f, &fk, grid, Regime::General, SEED)?;
            Ok::<_, schoenflies::Error>(r)
        })();
        match result {
            Ok(r) => {
                run.margins.push((name.to_string(), r.paper_bound_margins));
                run.agreement.push((name.to_string(), r.boundary_agreement, 1e-3 * f.diam()));
            }
            Err(e) => run.failures.push(format!("{name}: {e}")),
        }
    }
    run.secs = start.elapsed().as_secs_f64();
    run
}

fn theorem_margins(run: &CorpusRun) -> Line {
    let bad: usize = run.margins.iter().map(|(_, m)| violations(m)).sum();
    let count: usize = run.margins.iter().map(|(_, m)| m.len()).sum();
    let mut detail = format!("{count} margins over {} extensions, {bad} violations", run.margins.len());
    for f in &run.failures {
        detail.push_str(&format!("; not evaluated, {f}"));
    }
    Line::new(bad == 0 && run.failures.is_empty(), detail)
}

fn round_trip(run: &CorpusRun) -> Line {
    let mut pass = run.failures.is_empty() && run.secs < 900.0;
    let mut parts = Vec::new();
    for (name, a, tol) in &run.agreement {
        pass &= a <= tol;
        parts.push(format!("{name} {a:.1e}/{tol:.1e}"));
    }
    for f in &run.failures {
        parts.push(format!("failed, {f}"));
    }
    parts.push(format!("{:.0}s", run.secs));
    Line::new(pass, parts.join(", "))
}

fn symmetrization_margins() -> Line {
    let mut margins = Vec::new();
    let mut failures = Vec::new();
    for (name, f) in symmetric_corpus().into_iter().chain(general_corpus()) {
        let origin = c(0.0, 0.0);
        let mut runs = vec![symmetrize_recentred(&f).map(|s| (s, true))];
        if winding_number(&f, origin).map(|w| w.abs() == 1).unwrap_or(false) {
            runs.push(symmetrize(&f, origin).map(|s| (s, false)));
        }
        for r in runs {
            match r.and_then(|(s, recentred)| symmetrization_report(&s, recentred)) {
                Ok(rep) => margins.extend(rep.prop84_margins.into_iter().chain(rep.cor85_margins).chain(rep.inradius_margins)),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    let negative = margins.iter().filter(|m| !(m.margin >= 0.0)).count();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut sv_err = 0.0f64;
    for _ in 0..100 {
        let z = C64::from_polar(rng.random_range(0.05..5.0), rng.random_range(0.0..TAU));
        let h = 1e-6 * z.norm();
        let dx = (winding_map(z + h) - winding_map(z - h)) / (2.0 * h);
        let dy = (winding_map(z + c(0.0, h)) - winding_map(z - c(0.0, h))) / (2.0 * h);
        let fd = schoenflies::Jacobian2::new(dx.re, dy.re, dx.im, dy.im);
        let (hi, lo) = fd.singular_values();
        let analytic = winding_jacobian(z).unwrap();
        let d = [analytic.a - fd.a, analytic.b - fd.b, analytic.c - fd.c, analytic.d - fd.d];
        sv_err = sv_err.max((hi - 2.0).abs()).max((lo - 1.0).abs()).max(d.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    let mut detail = format!("{} margins, {negative} negative; winding singular values off by {sv_err:.1e}", margins.len());
    for f in &failures {
        detail.push_str(&format!("; {f}"));
    }
    Line::new(negative == 0 && failures.is_empty() && sv_err <= 1e-6, detail)
}

fn main() -> ExitCode {
    let names = [
        "identity, rotation and scaling exactness",
        "translated circle anchor",
        "lower harmonic measure bounds",
        "Beurling-Nevanlinna Monte Carlo",
        "Beurling-Ahlfors identities",
        "modulus and annulus bounds",
        "conformal sandwiches and capacity",
        "theorem-consistency margins",
        "round-trip fidelity",
        "symmetrization margins and winding map",
    ];
    let mut corpus: Option<CorpusRun> = None;
    let mut failed = 0;
    for (k, name) in names.iter().enumerate() {
        let start = Instant::now();
        let line = match k {
            0 => exactness(),
            1 => translated_circle_anchor(),
            2 => lower_harmonic(),
            3 => beurling_nevanlinna(),
            4 => beurling_ahlfors(),
            5 => modulus_bounds(),
            6 => conformal_sandwiches(),
            7 => theorem_margins(corpus.get_or_insert_with(corpus_run)),
            8 => round_trip(corpus.get_or_insert_with(corpus_run)),
            _ => symmetrization_margins(),
        };
        if !line.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1}s]",
            if line.pass { "PASS" } else { "FAIL" },
            k + 1,
            line.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", names.len() - failed, names.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
