//! `schoenflies` command-line front end.
//!
//! Exit codes: 0 all checks pass, 2 an inequality is violated, 3 bad input,
//! 4 numerical failure. Failures print a JSON error object on stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use schoenflies::curves::{curve_constants, make_embedding, winding_number, CircleEmbedding, CurveSpec};
use schoenflies::extend::{
    extend_plane_symmetric, extension_report, polar_grid_lines, Extension, ExtensionReport, GridRow, GridSpec,
    Regime,
};
use schoenflies::geom::distance_to_closed;
use schoenflies::report::{panels_svg, two_panel_svg, write_json, CheckReport};
use schoenflies::symmetrize::{
    extend_plane_general, symmetrization_report, symmetrize, symmetrize_recentred, SymmetrizationReport,
    WindingSymmetrization,
};
use schoenflies::verify::{self, holds, run_verify, summarize, VerifyConfig, DEFAULT_TOLERANCE};
use schoenflies::{Error, Result, C64};

#[derive(Parser)]
#[command(name = "schoenflies", version, about = "Bi-Lipschitz extension of planar Jordan curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend each input curve to the plane and measure the Jacobian on a grid.
    Extend(RunArgs),
    /// Winding-symmetrize each input curve and check the Lipschitz transfer bounds.
    Symmetrize(RunArgs),
    /// Harmonic measure bounds: random polygons without input, corollaries per input curve.
    Harmonic(RunArgs),
    /// Run every inequality suite on the default corpus or the input curves.
    Verify(RunArgs),
    /// Two-panel SVG of each input curve and its symmetrization.
    Render(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Curve JSON files; glob patterns are expanded.
    #[arg(long, short)]
    input: Vec<String>,
    #[arg(long, short, env = "SCHOENFLIES_OUT", default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample count for family curves, overriding the file.
    #[arg(long)]
    n: Option<usize>,
    /// Walks per Monte Carlo estimate.
    #[arg(long, default_value_t = 10_000)]
    walks: u64,
    /// Measurement grid as `RADIIxANGLES`.
    #[arg(long, default_value = "64x256")]
    grid: GridSpec,
    /// Relative tolerance on inequality margins.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Corrupt the Poisson kernel (fault injection for the harmonic suites).
    #[arg(long, hide = true)]
    poisson_fault: bool,
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }

    fn and(self, other: Outcome) -> Outcome {
        Outcome::from_pass(self == Outcome::Pass && other == Outcome::Pass)
    }
}

#[derive(Serialize)]
struct ErrorPayload {
    error: &'static str,
    message: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Extend(a) => for_each_curve(&a, cmd_extend),
        Command::Symmetrize(a) => for_each_curve(&a, cmd_symmetrize),
        Command::Harmonic(a) => cmd_harmonic(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Render(a) => for_each_curve(&a, cmd_render),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e) => {
            let (kind, code) = if e.is_input_error() { ("input", 3) } else { ("numerical", 4) };
            let payload = ErrorPayload { error: kind, message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&payload).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(code)
        }
    }
}

fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in patterns {
        if p.contains(['*', '?', '[']) {
            let paths = glob::glob(p).map_err(|e| Error::InvalidInput(format!("bad glob {p}: {e}")))?;
            let mut matched: Vec<PathBuf> = paths.filter_map(|r| r.ok()).collect();
            if matched.is_empty() {
                return Err(Error::InvalidInput(format!("no file matches {p}")));
            }
            matched.sort();
            out.extend(matched);
        } else {
            out.push(PathBuf::from(p));
        }
    }
    Ok(out)
}

fn load_curve(path: &Path, n: Option<usize>) -> Result<CircleEmbedding> {
    let text = std::fs::read_to_string(path)?;
    let mut spec: CurveSpec = serde_json::from_str(&text)?;
    if let (CurveSpec::Family { n: count, .. }, Some(m)) = (&mut spec, n) {
        *count = m;
    }
    make_embedding(&spec)
}

fn curve_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "curve".into(), |s| s.to_string_lossy().into_owned())
}

/// Run `cmd` per input curve, in `out/<stem>` when there are several.
fn for_each_curve(args: &RunArgs, cmd: fn(&CircleEmbedding, &Path, &RunArgs) -> Result<Outcome>) -> Result<Outcome> {
    let paths = expand_inputs(&args.input)?;
    if paths.is_empty() {
        return Err(Error::InvalidInput("--input is required".into()));
    }
    let mut outcome = Outcome::Pass;
    for path in &paths {
        let curve = load_curve(path, args.n)?;
        let dir = if paths.len() > 1 { args.out.join(curve_name(path)) } else { args.out.clone() };
        std::fs::create_dir_all(&dir)?;
        outcome = outcome.and(cmd(&curve, &dir, args)?);
    }
    Ok(outcome)
}

fn margins_hold(margins: &[CheckReport], tol: f64) -> bool {
    margins.iter().all(|r| holds(r, tol))
}

#[derive(Serialize)]
struct ExtendOutput {
    #[serde(flatten)]
    report: ExtensionReport,
    boundary_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetrization: Option<SymmetrizationReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    transport_margins: Vec<CheckReport>,
}

fn cmd_extend(curve: &CircleEmbedding, dir: &Path, args: &RunArgs) -> Result<Outcome> {
    let fk = curve_constants(curve, 1)?;
    let (output, rows, lines) = if curve.is_symmetric() {
        let ext = extend_plane_symmetric(curve)?;
        let (report, rows) = extension_report(&ext, curve, &fk, args.grid, Regime::Symmetric, args.seed)?;
        let lines = image_lines(&ext)?;
        let output = ExtendOutput {
            report,
            boundary_tolerance: 1e-3 * curve.diam(),
            symmetrization: None,
            transport_margins: Vec::new(),
        };
        (output, rows, lines)
    } else {
        let (ext, general) = extend_plane_general(curve, args.grid)?;
        let (report, rows) = extension_report(&ext, curve, &fk, args.grid, Regime::General, args.seed)?;
        let lines = image_lines(&ext)?;
        let output = ExtendOutput {
            report,
            boundary_tolerance: 1e-3 * curve.diam(),
            symmetrization: Some(general.symmetrization),
            transport_margins: general.transport_margins,
        };
        (output, rows, lines)
    };
    write_json(&dir.join("extension_report.json"), &output)?;
    std::fs::write(dir.join("jacobian_grid.csv"), grid_csv(&rows))?;
    std::fs::write(dir.join("image_grid.svg"), panels_svg(&lines.0, &lines.1, &[]))?;
    let r = &output.report;
    Ok(Outcome::from_pass(
        r.boundary_agreement <= output.boundary_tolerance
            && margins_hold(&r.paper_bound_margins, args.tolerance)
            && margins_hold(&output.transport_margins, args.tolerance),
    ))
}

type Panels = (Vec<(Vec<C64>, bool)>, Vec<(Vec<C64>, bool)>);

/// Polar grid lines and their images; circles are closed, rays open.
fn image_lines(ext: &dyn Extension) -> Result<Panels> {
    let circles = 8;
    let lines = polar_grid_lines(circles, 16, 256);
    let mut left = Vec::with_capacity(lines.len());
    let mut right = Vec::with_capacity(lines.len());
    for (k, line) in lines.into_iter().enumerate() {
        let image = line.iter().map(|&z| ext.eval(z)).collect::<Result<Vec<_>>>()?;
        left.push((line, k < circles));
        right.push((image, k < circles));
    }
    Ok((left, right))
}

fn grid_csv(rows: &[GridRow]) -> String {
    let mut s = String::from("x,y,u,v,norm_DF,norm_DF_inv,det\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.point.re, r.point.im, r.image.re, r.image.im, r.norm, r.inverse_norm, r.det
        );
    }
    s
}

/// Symmetrize about the origin when the curve winds once around it, else about an incenter.
fn symmetrize_auto(curve: &CircleEmbedding) -> Result<(WindingSymmetrization, bool)> {
    let origin = C64::new(0.0, 0.0);
    let inside = distance_to_closed(curve.points(), origin) > 1e-12 * curve.diam()
        && winding_number(curve, origin)?.abs() == 1;
    if inside {
        Ok((symmetrize(curve, origin)?, false))
    } else {
        Ok((symmetrize_recentred(curve)?, true))
    }
}

#[derive(Serialize)]
struct SymmetrizeOutput {
    #[serde(flatten)]
    report: SymmetrizationReport,
    recentred: bool,
}

fn cmd_symmetrize(curve: &CircleEmbedding, dir: &Path, args: &RunArgs) -> Result<Outcome> {
    let (sym, recentred) = symmetrize_auto(curve)?;
    let report = symmetrization_report(&sym, recentred)?;
    let pass = margins_hold(&report.prop84_margins, args.tolerance)
        && margins_hold(&report.cor85_margins, args.tolerance)
        && margins_hold(&report.inradius_margins, args.tolerance);
    write_json(&dir.join("symmetrization_report.json"), &SymmetrizeOutput { report, recentred })?;
    write_json(&dir.join("symmetrized_curve.json"), &sym.g.to_spec())?;
    Ok(Outcome::from_pass(pass))
}

#[derive(Serialize)]
struct HarmonicOutput {
    seed: u64,
    walks: u64,
    inequalities: Vec<verify::InequalitySummary>,
    checks: Vec<CheckReport>,
}

fn cmd_harmonic(args: &RunArgs) -> Result<Outcome> {
    let mut checks = Vec::new();
    if args.input.is_empty() {
        checks.extend(verify::bn_checks(12, args.walks, args.seed)?);
        checks.extend(verify::lowerharm_checks(200, args.seed, args.poisson_fault)?);
    } else {
        for (k, path) in expand_inputs(&args.input)?.iter().enumerate() {
            let curve = load_curve(path, args.n)?;
            checks.extend(verify::corollary_checks(&curve, args.walks, args.seed.wrapping_add(k as u64))?);
        }
    }
    let inequalities: Vec<_> = summarize(&checks, args.tolerance).into_iter().filter(|s| s.checks > 0).collect();
    let pass = inequalities.iter().all(|s| s.pass);
    std::fs::create_dir_all(&args.out)?;
    let output = HarmonicOutput { seed: args.seed, walks: args.walks, inequalities, checks };
    write_json(&args.out.join("harmonic_report.json"), &output)?;
    Ok(Outcome::from_pass(pass))
}

fn cmd_verify(args: &RunArgs) -> Result<Outcome> {
    let mut config = VerifyConfig::new(args.seed, args.walks)?;
    config.tolerance = args.tolerance;
    config.poisson_fault = args.poisson_fault;
    if !args.input.is_empty() {
        config.corpus = expand_inputs(&args.input)?
            .iter()
            .map(|p| Ok((curve_name(p), load_curve(p, args.n)?)))
            .collect::<Result<_>>()?;
    }
    let report = run_verify(&config)?;
    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("verify_report.json"), &report)?;
    Ok(Outcome::from_pass(report.pass))
}

fn cmd_render(curve: &CircleEmbedding, dir: &Path, _args: &RunArgs) -> Result<Outcome> {
    let (sym, _) = symmetrize_auto(curve)?;
    let fk = curve_constants(curve, 1)?;
    let gk = sym.g_constants()?;
    let shift = sym.w0;
    let left: Vec<C64> = curve.points().iter().map(|p| p - shift).collect();
    let labels = vec![
        (0, fk.argmin_pair.image[0] - shift, "a".to_string()),
        (0, fk.argmin_pair.image[1] - shift, "b".to_string()),
        (1, gk.argmin_pair.image[0], "A".to_string()),
        (1, gk.argmin_pair.image[1], "B".to_string()),
    ];
    let svg = two_panel_svg(&[left], &[sym.g.points().to_vec()], &labels);
    std::fs::write(dir.join("symmetrization.svg"), svg)?;
    Ok(Outcome::Pass)
}
