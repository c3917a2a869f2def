//! Command-line front end.
//!
//! Exit codes: 0 decided, 1 input error, 2 undecided, 3 suite failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use super::catalog::{builtin, CatalogEntry, ExpectedStep};
use super::report;
use super::suite::{expand_map_ref, run_suite, select, SuiteOptions};
use crate::dynamics::{
    default_seeds, nontangential_diagnostic, ClassifyOptions, DynamicsError, Frame, StepVerdict, WolffOptions,
};
use crate::geometry::{Model, Point};
use crate::map::{format_complex, parse_complex_literal, parse_map, MapExpr};
use crate::straightening::{default_grid, straightening_limit, StraighteningError, DEFAULT_MAX_N, DEFAULT_TOL};
use crate::valiron::{
    arg_dichotomy_check, ratio_sequence, slope_propagation_check, ParabolicMap, ValironError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "HEINS_LAB_OUT";

#[derive(Parser, Debug)]
#[command(name = "parabolic-lab", version, about = "Iteration of holomorphic self-maps of the disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// Map expression, or catalog:<name>.
    #[arg(long)]
    map: String,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output directory (default: $HEINS_LAB_OUT, else ./lab-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a self-map as elliptic, hyperbolic or parabolic.
    Classify {
        #[command(flatten)]
        map: MapArgs,
        /// Orbit length for the multiplier.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Classification tolerance.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Seeds, "z1;z2;...". Prefix a point with h: for half-plane coordinates.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Dump one orbit as CSV.
    Orbit {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value = "0")]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate the hyperbolic step at a list of points.
    Step {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Threshold below which a step counts as zero.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Approximate the left straightening on a grid.
    Straighten {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value = "0")]
        base: String,
        #[arg(long = "ref", default_value = "0.5")]
        reference: String,
        #[arg(long)]
        grid: Option<String>,
        /// Largest iterate tried.
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ratio and slope limits of a parabolic map.
    Valiron {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value = "0")]
        base: String,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Agreement tolerance for slopes.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the verification suite over the catalog.
    Suite {
        /// Glob over catalog entry names.
        #[arg(long)]
        catalog: Option<String>,
        /// JSON file with catalog entries replacing the built-in ones.
        #[arg(long)]
        catalog_file: Option<PathBuf>,
        /// Maps processed concurrently (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List the built-in maps.
    Catalog,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

type CliResult = Result<i32, Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    }
}

fn dynamics(e: DynamicsError) -> Failure {
    let code = match e {
        DynamicsError::Undecided(_) => EXIT_UNDECIDED,
        _ => EXIT_INPUT,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn resolve_map(arg: &MapArgs) -> Result<(String, MapExpr), Failure> {
    let text = expand_map_ref(&arg.map, &builtin()).map_err(input)?;
    let m = parse_map(&text).map_err(input)?;
    if !m.is_endo() {
        return Err(input(format!(
            "map must be a self-map, got {} -> {}",
            m.domain(),
            m.codomain()
        )));
    }
    Ok((text, m))
}

/// One point: a complex literal in the disk, or `h:` and a literal in the half-plane.
pub fn parse_point(text: &str) -> Result<Point, String> {
    let text = text.trim();
    let (model, literal) = match text.strip_prefix("h:") {
        Some(rest) => (Model::HalfPlane, rest),
        None => (Model::Disk, text),
    };
    let z = parse_complex_literal(literal).map_err(|e| format!("point '{text}': {e}"))?;
    Point::new(z, model).map_err(|e| format!("point '{text}': {e}"))
}

/// `"z1;z2;..."`.
pub fn parse_points(text: &str) -> Result<Vec<Point>, String> {
    let pts: Vec<Point> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_point)
        .collect::<Result<_, _>>()?;
    if pts.is_empty() {
        return Err("empty point list".into());
    }
    Ok(pts)
}

fn disk_coord(p: &Point) -> Result<Complex64, Failure> {
    match p.model() {
        Model::Disk => Ok(p.coord()),
        Model::HalfPlane => Err(input("this flag takes disk points")),
    }
}

fn out_dir(arg: &OutArgs) -> PathBuf {
    arg.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lab-out"))
}

fn save(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    report::write(&dir.join(name), contents).map_err(|e| input(format!("writing {}: {e}", dir.join(name).display())))
}

fn print_json(v: &Value) {
    print!("{}", report::to_text(v));
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Classify { map, n, tol, seeds } => classify(&map, n, tol, seeds.as_deref()),
        Command::Orbit { map, start, n, out } => orbit(&map, &start, n, &out_dir(&out)),
        Command::Step { map, points, n, tol, out } => step(&map, points.as_deref(), n, tol, &out_dir(&out)),
        Command::Straighten {
            map,
            base,
            reference,
            grid,
            n,
            tol,
            out,
        } => straighten(&map, &base, &reference, grid.as_deref(), n, tol, &out_dir(&out)),
        Command::Valiron {
            map,
            points,
            base,
            n,
            tol,
            out,
        } => valiron(&map, points.as_deref(), &base, n, tol, &out_dir(&out)),
        Command::Suite {
            catalog,
            catalog_file,
            jobs,
            out,
        } => suite(catalog.as_deref(), catalog_file.as_deref(), jobs, &out_dir(&out)),
        Command::Catalog => {
            print!("{}", catalog_listing(&builtin()));
            Ok(EXIT_OK)
        }
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn classify(map: &MapArgs, n: usize, tol: f64, seeds: Option<&str>) -> CliResult {
    let (text, m) = resolve_map(map)?;
    let mut opts = ClassifyOptions {
        n,
        tol_class: tol,
        ..ClassifyOptions::default()
    };
    if let Some(s) = seeds {
        let pts = parse_points(s).map_err(input)?;
        opts.wolff = WolffOptions {
            seeds: pts.clone(),
            ..WolffOptions::default()
        };
        opts.probes = pts;
    }
    let class = Frame::with_options(&m, &opts.wolff)
        .and_then(|f| f.classify(&opts))
        .map_err(dynamics)?;
    let mut v = report::classification(&class);
    v["schema"] = json!(report::SCHEMA);
    v["map"] = json!(text);
    print_json(&v);
    Ok(if class.is_decided() { EXIT_OK } else { EXIT_UNDECIDED })
}

fn orbit(map: &MapArgs, start: &str, n: usize, out: &Path) -> CliResult {
    let (text, m) = resolve_map(map)?;
    let start = parse_point(start).map_err(input)?;
    let frame = Frame::new(&m).map_err(dynamics)?;
    // one extra step so that d_n and the ratio are defined on every row
    let rec = frame.orbit(&start, n + 1).map_err(dynamics)?;
    save(out, "orbit.csv", &report::orbit_csv(&rec, n + 1))?;
    let diag = nontangential_diagnostic(&rec);
    let summary = report::envelope(
        "orbit",
        json!({
            "map": text,
            "start": report::point(&start),
            "n": n,
            "steps": rec.steps().min(n),
            "escaped": rec.escaped,
            "model": match rec.model { Model::Disk => "disk", Model::HalfPlane => "halfplane" },
            "tau": rec.tau.map(report::complex),
            "d_last": rec.d.last().map(|d| report::real(*d)),
            "eps_last_decade": diag.as_ref().map(|d| report::real(d.eps_last_decade)),
            "nontangential": diag.as_ref().map(|d| d.nontangential),
            "files": ["orbit.csv"],
        }),
    );
    save(out, "orbit.json", &report::to_text(&summary))?;
    print_json(&summary);
    Ok(EXIT_OK)
}

fn step(map: &MapArgs, points: Option<&str>, n: usize, tol: f64, out: &Path) -> CliResult {
    let (text, m) = resolve_map(map)?;
    let probes = match points {
        Some(s) => parse_points(s).map_err(input)?,
        None => default_seeds(),
    };
    let frame = Frame::new(&m).map_err(dynamics)?;
    let steps = probes
        .iter()
        .map(|p| frame.step_estimate(p, n, tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(dynamics)?;
    let mut csv = String::from("probe_re,probe_im,d_tail,tail_ratio,s_hat,verdict,n_used\n");
    for s in &steps {
        let verdict = serde_json::to_value(s.verdict).expect("verdicts serialize");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            s.probe.coord().re,
            s.probe.coord().im,
            s.d_tail,
            s.tail_ratio,
            s.s_hat,
            verdict.as_str().unwrap_or_default(),
            s.n_used
        );
    }
    save(out, "step.csv", &csv)?;
    let summary = report::envelope(
        "step",
        json!({
            "map": text,
            "n": n,
            "eps_zero": tol,
            "steps": steps.iter().map(report::step).collect::<Vec<_>>(),
            "files": ["step.csv"],
        }),
    );
    save(out, "step.json", &report::to_text(&summary))?;
    print_json(&summary);
    let undecided = steps.iter().any(|s| s.verdict == StepVerdict::Undecided);
    Ok(if undecided { EXIT_UNDECIDED } else { EXIT_OK })
}

fn straighten(
    map: &MapArgs,
    base: &str,
    reference: &str,
    grid: Option<&str>,
    max_n: usize,
    tol: f64,
    out: &Path,
) -> CliResult {
    let (text, m) = resolve_map(map)?;
    let z0 = disk_coord(&parse_point(base).map_err(input)?)?;
    let w0 = disk_coord(&parse_point(reference).map_err(input)?)?;
    let grid = match grid {
        Some(s) => parse_points(s)
            .map_err(input)?
            .iter()
            .map(disk_coord)
            .collect::<Result<Vec<_>, _>>()?,
        None => default_grid(z0, w0),
    };
    let frame = Frame::new(&m).map_err(dynamics)?;
    let lim = match straightening_limit(&frame, z0, w0, &grid, max_n, tol) {
        Ok(l) => l,
        Err(e @ StraighteningError::NotConverged { .. }) => {
            return Err(Failure {
                code: EXIT_UNDECIDED,
                message: e.to_string(),
            })
        }
        Err(StraighteningError::Dynamics(e)) => return Err(dynamics(e)),
        Err(e) => return Err(input(e)),
    };
    save(out, "straighten.csv", &report::straighten_csv(&lim))?;
    let summary = report::envelope(
        "straighten",
        json!({
            "map": text,
            "max_n": max_n,
            "tol": tol,
            "straightening": report::straightening(&lim),
            "files": ["straighten.csv"],
        }),
    );
    save(out, "straighten.json", &report::to_text(&summary))?;
    print_json(&summary);
    Ok(EXIT_OK)
}

fn valiron_failure(e: ValironError) -> Failure {
    match e {
        ValironError::Dynamics(d) => dynamics(d),
        other => input(other),
    }
}

fn valiron(map: &MapArgs, points: Option<&str>, base: &str, n: usize, tol: f64, out: &Path) -> CliResult {
    let (text, m) = resolve_map(map)?;
    let probes = match points {
        Some(s) => parse_points(s).map_err(input)?,
        None => default_seeds(),
    };
    let z0 = parse_point(base).map_err(input)?;
    let pm = ParabolicMap::new(&m).map_err(valiron_failure)?;
    let ratios = probes
        .iter()
        .map(|p| ratio_sequence(&pm, p, &z0, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(valiron_failure)?;
    let propagation = slope_propagation_check(&pm, &probes, n, tol).map_err(valiron_failure)?;
    let dichotomy = match pm.step_class() {
        StepVerdict::Positive => Some(arg_dichotomy_check(&pm, &probes, n).map_err(valiron_failure)?),
        _ => None,
    };

    let mut csv = String::from("probe,n,q_re,q_im,big_q_re,big_q_im,arg\n");
    for (k, (r, s)) in ratios.iter().zip(&propagation.slopes).enumerate() {
        for (i, (q, bq)) in r.q.iter().zip(&r.big_q).enumerate() {
            let arg = s.args.get(i).map_or(String::new(), |a| a.to_string());
            let _ = writeln!(csv, "{k},{i},{},{},{},{},{arg}", q.re, q.im, bq.re, bq.im);
        }
    }
    save(out, "valiron.csv", &csv)?;
    let summary = report::envelope(
        "valiron",
        json!({
            "map": text,
            "n": n,
            "tol": tol,
            "tau": report::complex(pm.tau()),
            "step_class": pm.step_class(),
            "base": report::point(&z0),
            "ratios": ratios.iter().map(|r| json!({
                "probe": report::point(&r.probe),
                "error": report::real(r.error),
                "disk_error": report::real(r.disk_error),
                "monotone_last_decade": r.monotone_last_decade,
            })).collect::<Vec<_>>(),
            "slopes": propagation.slopes.iter().map(|s| json!({
                "probe": report::point(&s.probe),
                "theta": report::real(s.theta_hat),
                "sigma": report::complex(s.sigma_hat),
                "converged": s.converged,
            })).collect::<Vec<_>>(),
            "propagation": format!("{:?}", propagation.verdict),
            "arg_dichotomy": dichotomy.as_ref().map(|d| format!("{:?}", d.verdict)),
            "files": ["valiron.csv"],
        }),
    );
    save(out, "valiron.json", &report::to_text(&summary))?;
    print_json(&summary);
    let undecided = propagation.slopes.iter().any(|s| !s.converged)
        || dichotomy.is_some_and(|d| d.verdict == crate::valiron::ArgVerdict::Undecided);
    Ok(if undecided { EXIT_UNDECIDED } else { EXIT_OK })
}

fn suite(pattern: Option<&str>, file: Option<&Path>, jobs: usize, out: &Path) -> CliResult {
    let entries = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Vec<CatalogEntry>>(&text).map_err(|e| input(format!("{}: {e}", path.display())))?
        }
        None => builtin(),
    };
    let entries = select(entries, pattern).map_err(input)?;
    if entries.is_empty() {
        return Err(input("no catalog entries selected"));
    }
    let opts = SuiteOptions {
        jobs,
        global: pattern.is_none(),
    };
    let outcome = run_suite(&entries, &opts);
    outcome.write(out).map_err(|e| input(format!("writing reports to {}: {e}", out.display())))?;
    for m in &outcome.maps {
        println!("{} {} ({} checks)", if m.passed() { "PASS" } else { "FAIL" }, m.name, m.checks.len());
    }
    for c in &outcome.global {
        println!("{} global {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    if outcome.passed() {
        Ok(EXIT_OK)
    } else {
        for f in outcome.failures() {
            eprintln!("failed: {f}");
        }
        Ok(EXIT_SUITE)
    }
}

fn pretty_complex(z: Complex64) -> String {
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let z = Complex64::new(snap(z.re), snap(z.im));
    match (z.re, z.im) {
        (re, im) if re == 0.0 && im == 1.0 => "i".into(),
        (re, im) if re == 0.0 && im == -1.0 => "-i".into(),
        (re, im) if im == 0.0 => format!("{re}"),
        _ => format_complex(z),
    }
}

/// Human-readable listing of catalog entries.
pub fn catalog_listing(entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let class = serde_json::to_value(e.class).expect("serializes");
        let _ = write!(out, "{} = {}\n  class: {}", e.name, e.dsl, class.as_str().unwrap_or_default());
        if let Some(step) = e.step {
            let _ = write!(
                out,
                ", step: {}",
                match step {
                    ExpectedStep::Zero => "zero",
                    ExpectedStep::Positive => "positive",
                }
            );
        }
        if let Some(l) = e.lambda {
            let _ = write!(out, ", multiplier: {l}");
        }
        if let Some(s) = e.slope() {
            let _ = write!(out, ", slope: {}", pretty_complex(s));
        }
        let _ = writeln!(out, "\n  {}", e.note);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_in_both_models() {
        let pts = parse_points("0; 0.3 ;h:1+2i").unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[2].model(), Model::HalfPlane);
        assert_eq!(pts[2].coord(), Complex64::new(1.0, 2.0));
        assert!(parse_points("1.5").is_err());
        assert!(parse_points("h:-1i").is_err());
        assert!(parse_points(";").is_err());
    }

    #[test]
    fn listing_mentions_every_entry() {
        let text = catalog_listing(&builtin());
        assert!(text.contains("parabolic_aut_pos = invcayley . hshift(1+0i) . cayley"));
        assert!(text.contains("class: parabolic, step: positive, slope: -i"));
        assert!(text.contains("square = blaschke(0;(0+0i,2))\n  class: elliptic"));
    }
}
