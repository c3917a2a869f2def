//! The verification suite: every catalog map through classification, step,
//! straightening and Valiron checks, plus map-independent checks of the
//! geometry and the parser.

use std::f64::consts::PI;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::catalog::{CatalogEntry, ExpectedClass, ExpectedStep};
use super::fuzz::{fuzz_parser, random_tree, round_trips};
use super::report;
use crate::dynamics::{
    default_seeds, nontangential_diagnostic, ClassifyOptions, Classification, Frame, OrbitRecord, StepEstimate,
    StepVerdict,
};
use crate::geometry::{cayley, distance, poincare_disk, poincare_halfplane, MobiusAut, Model, Point};
use crate::map::{format_map, parse_map, ParseErrorKind};
use crate::straightening::{
    default_grid, ensure_grid, step_via_straightening, straightening_equivalence, straightening_limit,
    StraighteningError, StraighteningLimit, DEFAULT_MAX_N, DEFAULT_TOL,
};
use crate::valiron::{
    arg_dichotomy_check, ratio_sequence, slope_propagation_check, ArgVerdict, ParabolicMap, Propagation,
};

/// Orbit length for monotonicity, step and Valiron checks.
pub const SUITE_N: usize = 10_000;
pub const STEP_ZERO_MAX: f64 = 1e-3;
pub const STEP_POSITIVE_MIN: f64 = 0.1;
pub const CLOSED_FORM_TOL: f64 = 1e-9;
pub const LSHS_TOL: f64 = 1e-3;
pub const FIT_TOL: f64 = 1e-3;
pub const RATIO_TOL: f64 = 1e-3;
pub const SLOPE_TOL: f64 = 1e-2;
pub const METRIC_TOL: f64 = 1e-12;
pub const METRIC_CASES: usize = 1000;
pub const RANDOM_TREES: usize = 500;
pub const FUZZ_INPUTS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Maps run concurrently; 0 means one per core.
    pub jobs: usize,
    /// Run the map-independent checks as well.
    pub global: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { jobs: 0, global: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.0.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        passed
    }
}

#[derive(Clone, Debug)]
pub struct MapOutcome {
    pub name: String,
    pub checks: Vec<Check>,
    pub report: Value,
    /// Files to write, relative to the output directory.
    pub files: Vec<(String, String)>,
}

impl MapOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report_path(&self) -> String {
        format!("{}/report.json", self.name)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub maps: Vec<MapOutcome>,
    pub global: Vec<Check>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.maps.iter().all(MapOutcome::passed) && self.global.iter().all(|c| c.passed)
    }

    /// `map: check: detail` for every failed check.
    pub fn failures(&self) -> Vec<String> {
        let per_map = self
            .maps
            .iter()
            .flat_map(|m| m.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}: {}", m.name, c.name, c.detail)));
        let global = self.global.iter().filter(|c| !c.passed).map(|c| format!("global: {}: {}", c.name, c.detail));
        per_map.chain(global).collect()
    }

    pub fn rollup(&self) -> Value {
        let maps: Vec<Value> = self
            .maps
            .iter()
            .map(|m| {
                json!({
                    "name": m.name,
                    "passed": m.passed(),
                    "failed": m.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect::<Vec<_>>(),
                    "checks": m.checks.len(),
                    "report": m.report_path(),
                })
            })
            .collect();
        report::envelope(
            "suite",
            json!({
                "maps": maps,
                "global": self.global,
                "failures": self.failures(),
                "passed": self.passed(),
            }),
        )
    }

    /// Writes one report per map, its CSV dumps, and the roll-up `report.json`.
    pub fn write(&self, out: &Path) -> io::Result<()> {
        for m in &self.maps {
            report::write(&out.join(m.report_path()), &report::to_text(&m.report))?;
            for (rel, contents) in &m.files {
                report::write(&out.join(rel), contents)?;
            }
        }
        report::write(&out.join("report.json"), &report::to_text(&self.rollup()))
    }
}

/// Runs every entry, `opts.jobs` maps at a time, keeping catalog order.
pub fn run_suite(entries: &[CatalogEntry], opts: &SuiteOptions) -> SuiteOutcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let maps = entries.par_iter().map(run_map).collect();
        let global = if opts.global { global_checks(entries) } else { Vec::new() };
        SuiteOutcome { maps, global }
    })
}

/// Probe pairs `(z, 0)` for the ratio check.
pub fn ratio_probes() -> Vec<Point> {
    [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5), (0.3, 0.3)]
        .into_iter()
        .map(|(re, im)| Point::disk(Complex64::new(re, im)).expect("inside the disk"))
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn seed_for(name: &str) -> u64 {
    // FNV-1a, so that every map draws its own fixed random pairs
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn random_disk_point<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

struct Context<'a> {
    entry: &'a CatalogEntry,
    checks: Checks,
    body: Map<String, Value>,
    files: Vec<(String, String)>,
}

/// Full pipeline for one catalog entry. Never panics on a bad entry; every
/// problem becomes a failed check.
pub fn run_map(entry: &CatalogEntry) -> MapOutcome {
    let mut cx = Context {
        entry,
        checks: Checks::default(),
        body: Map::new(),
        files: Vec::new(),
    };
    cx.body.insert(
        "map".into(),
        json!({ "name": entry.name, "dsl": entry.dsl, "class": entry.class, "step": entry.step, "note": entry.note }),
    );
    let opts = ClassifyOptions::default();
    cx.body.insert(
        "parameters".into(),
        json!({
            "n_class": opts.n,
            "n": SUITE_N,
            "tol_class": opts.tol_class,
            "eps_zero": opts.eps_zero,
            "wolff_n": opts.wolff.n,
            "wolff_tol": opts.wolff.tol,
            "seeds": opts.probes.iter().map(report::point).collect::<Vec<_>>(),
            "straightening_tol": DEFAULT_TOL,
            "straightening_max_n": DEFAULT_MAX_N,
        }),
    );
    pipeline(&mut cx, &opts);
    let checks = cx.checks.0;
    let passed = checks.iter().all(|c| c.passed);
    cx.body.insert("checks".into(), json!(checks));
    cx.body.insert("passed".into(), json!(passed));
    let names: Vec<&str> = cx.files.iter().map(|(p, _)| p.as_str()).collect();
    cx.body.insert("files".into(), json!(names));
    MapOutcome {
        name: entry.name.clone(),
        checks,
        report: report::envelope("suite", Value::Object(cx.body)),
        files: cx.files,
    }
}

fn pipeline(cx: &mut Context, opts: &ClassifyOptions) {
    let entry = cx.entry;
    let consistent = entry.is_consistent();
    cx.checks.add("catalog_consistency", consistent.is_ok(), consistent.err().unwrap_or_default());
    let m = match parse_map(&entry.dsl) {
        Ok(m) => m,
        Err(e) => {
            cx.checks.add("parse", false, e.to_string());
            return;
        }
    };
    if !cx.checks.add("parse", m.is_endo() && round_trips(&m), format!("canonical form {}", format_map(&m))) {
        return;
    }
    let frame = match Frame::with_options(&m, &opts.wolff) {
        Ok(f) => f,
        Err(e) => {
            cx.checks.add("classification", false, e.to_string());
            return;
        }
    };
    let class = match frame.classify(opts) {
        Ok(c) => c,
        Err(e) => {
            cx.checks.add("classification", false, e.to_string());
            return;
        }
    };
    cx.body.insert("classification".into(), report::classification(&class));
    check_classification(cx, &class);

    let probes = default_seeds();
    let orbits = check_schwarz_pick(cx, &frame, &probes);
    let steps = check_steps(cx, &frame, &class, &probes);
    check_contraction(cx, &frame);
    let limits = check_straightening(cx, &frame, &class, &steps);
    if let (Some(lim), Some(steps)) = (&limits, &steps) {
        check_lshs(cx, &frame, lim, steps);
    }
    if let Classification::Parabolic { .. } = class {
        match ParabolicMap::from_parts(frame.clone(), class.clone()) {
            Ok(pm) => check_valiron(cx, &pm, &orbits),
            Err(e) => {
                cx.checks.add("valiron", false, e.to_string());
            }
        }
    }
}

fn check_classification(cx: &mut Context, class: &Classification) {
    let e = cx.entry;
    let expected = match e.class {
        ExpectedClass::Elliptic => "elliptic",
        ExpectedClass::Hyperbolic => "hyperbolic",
        ExpectedClass::Parabolic => "parabolic",
    };
    let mut ok = class.name() == expected;
    let mut detail = format!("expected {expected}, got {}", class.name());
    if let (Classification::Hyperbolic { lambda, .. }, Some(want)) = (class, e.lambda) {
        let err = (lambda - want).abs();
        ok &= err <= opts_tol_class();
        detail.push_str(&format!("; lambda {lambda:.9} vs {want} (error {err:.2e})"));
    }
    cx.checks.add("classification", ok, detail);
    if let Some(want) = e.step {
        let got = class.step_class();
        cx.checks.add(
            "step_class",
            got == Some(want.verdict()),
            format!("expected {:?}, got {:?}", want.verdict(), got),
        );
    }
}

fn opts_tol_class() -> f64 {
    ClassifyOptions::default().tol_class
}

fn check_schwarz_pick(cx: &mut Context, frame: &Frame, probes: &[Point]) -> Vec<OrbitRecord> {
    let results: Vec<_> = probes.par_iter().map(|p| frame.orbit(p, SUITE_N)).collect();
    let mut orbits = Vec::new();
    let mut errors = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => orbits.push(o),
            Err(e) => errors.push(format!("probe {k}: {e}")),
        }
    }
    let detail = if errors.is_empty() {
        format!("{} probes, N = {SUITE_N}", probes.len())
    } else {
        errors.join("; ")
    };
    cx.checks.add("schwarz_pick", errors.is_empty(), detail);
    if let Some(first) = orbits.first() {
        let rel = format!("{}/orbit.csv", cx.entry.name);
        cx.files.push((rel, report::orbit_csv(first, usize::MAX)));
    }
    orbits
}

fn is_boundary(class: &Classification) -> bool {
    !matches!(class, Classification::Elliptic { .. })
}

fn check_steps(cx: &mut Context, frame: &Frame, class: &Classification, probes: &[Point]) -> Option<Vec<StepEstimate>> {
    let steps = match probes
        .par_iter()
        .map(|p| frame.step_estimate(p, SUITE_N, opts_eps_zero()))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(s) => s,
        Err(e) => {
            cx.checks.add("step_estimate", false, e.to_string());
            return None;
        }
    };
    cx.body.insert("steps".into(), Value::Array(steps.iter().map(report::step).collect()));
    let s_hat: Vec<f64> = steps.iter().map(|s| s.s_hat).collect();

    // the dichotomy is a statement about maps without interior fixed points
    if is_boundary(class) {
        let expected = match (class, cx.entry.step) {
            (Classification::Hyperbolic { .. }, _) => Some(ExpectedStep::Positive),
            (_, step) => step,
        };
        let uniform = steps.iter().all(|s| s.verdict == steps[0].verdict);
        let (level_ok, what) = match expected {
            Some(ExpectedStep::Zero) => (s_hat.iter().all(|&s| s <= STEP_ZERO_MAX), format!("all s <= {STEP_ZERO_MAX}")),
            Some(ExpectedStep::Positive) => (s_hat.iter().all(|&s| s >= STEP_POSITIVE_MIN), format!("all s >= {STEP_POSITIVE_MIN}")),
            None => (true, "no expected class".into()),
        };
        let verdicts: Vec<StepVerdict> = steps.iter().map(|s| s.verdict).collect();
        cx.checks.add(
            "step_dichotomy",
            uniform && level_ok,
            format!("{what}; verdicts {verdicts:?}; s = {}", fmt_list(&s_hat)),
        );
    }

    if cx.entry.translation.is_some() && frame.kind() != crate::dynamics::FrameKind::Disk {
        let mut worst: f64 = 0.0;
        for s in &steps {
            let y0 = frame.to_working(&s.probe).map_or(f64::NAN, |w| w.im);
            let exact = cx.entry.translation_step(y0, SUITE_N).unwrap_or(f64::NAN);
            worst = worst.max((s.s_hat - exact).abs());
            if worst.is_nan() {
                break;
            }
        }
        cx.checks.add(
            "step_closed_form",
            worst <= CLOSED_FORM_TOL,
            format!("max |s - s_exact| = {worst:.3e} at N = {SUITE_N}"),
        );
    }
    Some(steps)
}

fn opts_eps_zero() -> f64 {
    ClassifyOptions::default().eps_zero
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn check_contraction(cx: &mut Context, frame: &Frame) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(&cx.entry.name));
    let pairs: Vec<(Complex64, Complex64)> =
        (0..10).map(|_| (random_disk_point(&mut rng, 0.9), random_disk_point(&mut rng, 0.9))).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut error = None;
    for (z, w) in pairs {
        let run = Point::disk(z)
            .and_then(|p| Point::disk(w).map(|q| (p, q)))
            .map_err(|e| e.to_string())
            .and_then(|(p, q)| frame.two_point_contraction(&p, &q, SUITE_N).map_err(|e| e.to_string()));
        match run {
            Ok(d) => {
                let rise = d.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(rise);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    match error {
        Some(e) => cx.checks.add("contraction", false, e),
        None => cx.checks.add(
            "contraction",
            worst <= crate::dynamics::MONOTONE_SLACK,
            format!("10 random pairs, largest increase {worst:.3e}"),
        ),
    };
}

/// Grid shared by both base points so the limits can be compared.
pub fn suite_grid() -> Vec<Complex64> {
    ensure_grid(c(0.3, 0.0), c(0.5, 0.0), &default_grid(c(0.0, 0.0), c(0.5, 0.0)))
}

fn check_straightening(
    cx: &mut Context,
    frame: &Frame,
    class: &Classification,
    steps: &Option<Vec<StepEstimate>>,
) -> Option<StraighteningLimit> {
    let grid = suite_grid();
    let w0 = c(0.5, 0.0);
    let bases = [c(0.0, 0.0), c(0.3, 0.0)];
    let runs: Vec<Result<StraighteningLimit, StraighteningError>> = bases
        .iter()
        .map(|&z0| straightening_limit(frame, z0, w0, &grid, DEFAULT_MAX_N, DEFAULT_TOL))
        .collect();
    let (a, b) = match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => (a.clone(), b.clone()),
        (Err(e), _) | (_, Err(e)) => {
            cx.checks.add("straightening", false, e.to_string());
            return None;
        }
    };
    cx.body.insert("straightening".into(), json!([report::straightening(&a), report::straightening(&b)]));
    cx.files.push((format!("{}/straighten.csv", cx.entry.name), report::straighten_csv(&a)));

    let mut detail = format!(
        "constant {} / {} (spread {:.3e} / {:.3e}, n = {} / {})",
        a.constant, b.constant, a.spread, b.spread, a.n, b.n
    );
    let mut ok = a.constant == b.constant;
    if is_boundary(class) {
        // constant exactly when the step vanishes
        let zero = match class {
            Classification::Parabolic { step_class, .. } => *step_class == StepVerdict::Zero,
            _ => false,
        };
        let step_zero = steps.as_ref().map(|s| s.iter().all(|e| e.verdict == StepVerdict::Zero));
        ok &= a.constant == zero && step_zero.map_or(true, |z| z == a.constant);
        detail.push_str(&format!("; zero step {zero}"));
    }
    cx.checks.add("straightening_constancy", ok, detail);

    if !a.constant && !b.constant {
        match straightening_equivalence(&a, &b, FIT_TOL) {
            Ok(fit) => cx.checks.add(
                "uniqueness",
                fit.residual <= FIT_TOL,
                format!("fitted automorphism residual {:.3e} on {} grid points", fit.residual, grid.len()),
            ),
            Err(e) => cx.checks.add("uniqueness", false, e.to_string()),
        };
    }
    Some(a)
}

fn check_lshs(cx: &mut Context, frame: &Frame, lim: &StraighteningLimit, steps: &[StepEstimate]) {
    let mut worst: f64 = 0.0;
    let mut error = None;
    for s in steps.iter().filter(|s| s.verdict != StepVerdict::Undecided) {
        match step_via_straightening(lim, frame, &s.probe) {
            Ok(v) => worst = worst.max((v - s.s_hat).abs()),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    match error {
        Some(e) => cx.checks.add("lshs_step", false, e),
        None => cx.checks.add("lshs_step", worst <= LSHS_TOL, format!("max |s_h - s_hat| = {worst:.3e}")),
    };

    // ω(ĥ(z), ĥ(w)) against ω(f^N z, f^N w)
    let pairs: Vec<(usize, usize)> = (0..10).map(|k| (2 + k, 2 + (k * 7 + 5) % (lim.grid.len() - 2))).collect();
    let mut worst: f64 = 0.0;
    for &(i, j) in &pairs {
        let pz = Point::disk(lim.grid[i]).expect("grid inside the disk");
        let pw = Point::disk(lim.grid[j]).expect("grid inside the disk");
        let limit = crate::geometry::disk_distance_raw(lim.values[i], lim.values[j]);
        match frame.two_point_contraction(&pz, &pw, SUITE_N) {
            Ok(d) => worst = worst.max((d[d.len() - 1] - limit).abs()),
            Err(e) => {
                cx.checks.add("lshs_pairs", false, e.to_string());
                return;
            }
        }
    }
    cx.checks.add(
        "lshs_pairs",
        worst <= LSHS_TOL,
        format!("{} grid pairs, max deviation {worst:.3e}", pairs.len()),
    );
}

fn check_valiron(cx: &mut Context, pm: &ParabolicMap, orbits: &[OrbitRecord]) {
    let base = Point::disk(c(0.0, 0.0)).expect("center");
    let probes = ratio_probes();
    let ratios: Result<Vec<_>, _> = probes.par_iter().map(|p| ratio_sequence(pm, p, &base, SUITE_N)).collect();
    match ratios {
        Ok(rs) => {
            let worst = max_of(rs.iter().map(|r| r.error));
            let monotone = rs.iter().all(|r| r.monotone_last_decade);
            cx.body.insert(
                "valiron_ratio".into(),
                json!(rs.iter().map(|r| json!({
                    "probe": report::point(&r.probe),
                    "error": report::real(r.error),
                    "disk_error": report::real(r.disk_error),
                    "monotone_last_decade": r.monotone_last_decade,
                })).collect::<Vec<_>>()),
            );
            cx.checks.add(
                "valiron_ratio",
                worst <= RATIO_TOL && monotone,
                format!("max |Q_N - 1| = {worst:.3e}, monotone over last decade: {monotone}"),
            );
        }
        Err(e) => {
            cx.checks.add("valiron_ratio", false, e.to_string());
        }
    }

    let seeds = default_seeds();
    let expected_theta = cx.entry.arg_limit;
    match slope_propagation_check(pm, &seeds, SUITE_N, SLOPE_TOL) {
        Ok(rep) => {
            let thetas: Vec<f64> = rep.slopes.iter().map(|s| s.theta_hat).collect();
            let mut ok = !matches!(rep.verdict, Propagation::Disagree { .. });
            if let Some(want) = expected_theta {
                ok &= thetas.iter().all(|t| (t - want).abs() <= SLOPE_TOL);
            }
            cx.body.insert("slopes".into(), json!(thetas));
            cx.checks.add(
                "slope_propagation",
                ok,
                format!("{:?}; theta = {}; expected {:?}", rep.verdict, fmt_list(&thetas), expected_theta),
            );
            let unit = max_of(rep.slopes.iter().map(|s| s.unit_error));
            cx.checks.add("unit_slope", unit <= 1e-12, format!("max ||sigma_n| - 1| = {unit:.3e}"));
        }
        Err(e) => {
            cx.checks.add("slope_propagation", false, e.to_string());
        }
    }

    if pm.step_class() == StepVerdict::Positive {
        match arg_dichotomy_check(pm, &seeds, SUITE_N) {
            Ok(rep) => {
                let tau = pm.tau();
                let target = match rep.verdict {
                    ArgVerdict::ArgToZero => Some((0.0, -Complex64::i() * tau)),
                    ArgVerdict::ArgToPi => Some((PI, Complex64::i() * tau)),
                    _ => None,
                };
                let mut ok = target.is_some();
                let mut slope_gap = f64::NAN;
                if let Some((theta, sigma)) = target {
                    slope_gap = max_of(rep.slopes.iter().map(|s| (s.sigma_hat - sigma).norm()));
                    ok &= slope_gap <= SLOPE_TOL;
                    if let Some(want) = expected_theta {
                        ok &= (theta - want).abs() < 1e-12;
                    }
                }
                cx.checks.add(
                    "arg_dichotomy",
                    ok,
                    format!("{:?}; max |sigma_hat - (±i tau)| = {slope_gap:.3e}", rep.verdict),
                );
            }
            Err(e) => {
                cx.checks.add("arg_dichotomy", false, e.to_string());
            }
        }
    }

    // non-tangential orbits force a zero step, and the cone bound on d_n holds
    let mut tangential_conflict = Vec::new();
    let mut violations = 0;
    let mut eps = Vec::new();
    for (k, o) in orbits.iter().enumerate() {
        if let Some(d) = nontangential_diagnostic(o) {
            eps.push(d.eps_last_decade);
            if d.nontangential && pm.step_class() != StepVerdict::Zero {
                tangential_conflict.push(k);
            }
            violations += d.violations.len();
        }
    }
    cx.checks.add(
        "val0_consistency",
        tangential_conflict.is_empty(),
        format!("eps over last decade {}; non-tangential orbits with non-zero step: {tangential_conflict:?}", fmt_list(&eps)),
    );
    cx.checks.add("cone_bound", violations == 0, format!("{violations} pointwise violations"));
}

/// Map-independent checks: metric exactness, multiplier closed forms,
/// parser round trips and the parser fuzz run.
pub fn global_checks(entries: &[CatalogEntry]) -> Vec<Check> {
    let mut checks = Checks::default();
    let (iso, cay, group) = metric_deviation(METRIC_CASES, 0x6d65_7472);
    checks.add(
        "metric_exactness",
        iso.max(cay).max(group) <= METRIC_TOL,
        format!("{METRIC_CASES} cases each: isometry {iso:.2e}, cayley {cay:.2e}, group laws {group:.2e}"),
    );

    let fam: Vec<(f64, Result<f64, String>)> = [1.5, 2.0, 4.0]
        .par_iter()
        .map(|&a| (a, hyperbolic_multiplier(a)))
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, r) in fam {
        match r {
            Ok(l) => {
                ok &= (l - 1.0 / a).abs() <= 1e-6;
                parts.push(format!("a = {a}: {:.3e}", (l - 1.0 / a).abs()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("a = {a}: {e}"));
            }
        }
    }
    checks.add("multiplier_family", ok, parts.join(", "));

    let mut rng = ChaCha8Rng::seed_from_u64(0x7472_6565);
    let catalog_ok = entries.iter().filter(|e| !parse_map(&e.dsl).is_ok_and(|m| round_trips(&m))).count();
    let trees_bad = (0..RANDOM_TREES)
        .filter(|_| {
            let domain = if rng.gen_bool(0.5) { Model::Disk } else { Model::HalfPlane };
            !round_trips(&random_tree(&mut rng, domain, 4))
        })
        .count();
    checks.add(
        "parser_roundtrip",
        catalog_ok == 0 && trees_bad == 0,
        format!("catalog failures {catalog_ok}, random tree failures {trees_bad} of {RANDOM_TREES}"),
    );

    let seeds: Vec<String> = entries.iter().map(|e| e.dsl.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6675_7a7a);
    let fuzz = fuzz_parser(&mut rng, FUZZ_INPUTS, &seeds);
    checks.add(
        "parser_fuzz",
        fuzz.crashes.is_empty() && fuzz.bad_offsets.is_empty() && fuzz.unstable.is_empty(),
        format!(
            "{} inputs, {} accepted, {} crashes, {} bad offsets, {} unstable",
            fuzz.inputs,
            fuzz.accepted,
            fuzz.crashes.len(),
            fuzz.bad_offsets.len(),
            fuzz.unstable.len()
        ),
    );

    let offsets = [
        ("rot(x)", ParseErrorKind::Syntax, 4),
        ("cayley . cayley", ParseErrorKind::Type, 7),
        ("rot(1) . hshift(1)", ParseErrorKind::Type, 7),
        ("cayley^2", ParseErrorKind::Type, 6),
    ];
    let wrong: Vec<&str> = offsets
        .iter()
        .filter(|(text, kind, at)| !matches!(parse_map(text), Err(e) if e.kind == *kind && e.offset == *at))
        .map(|(text, _, _)| *text)
        .collect();
    checks.add("parser_offsets", wrong.is_empty(), format!("wrong offsets for {wrong:?}"));
    checks.0
}

/// `λ` for `hscale(a)` conjugated to the disk, at the classification length.
pub fn hyperbolic_multiplier(a: f64) -> Result<f64, String> {
    let m = parse_map(&format!("invcayley . hscale({a}) . cayley")).map_err(|e| e.to_string())?;
    match crate::dynamics::classify(&m, &ClassifyOptions::default()).map_err(|e| e.to_string())? {
        Classification::Hyperbolic { lambda, .. } => Ok(lambda),
        other => Err(format!("classified as {}", other.name())),
    }
}

/// Largest deviations of automorphism isometry, Cayley isometry and group
/// laws over `cases` random configurations each.
pub fn metric_deviation(cases: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aut = |rng: &mut ChaCha8Rng| {
        MobiusAut::disk(rng.gen_range(-PI..PI), random_disk_point(rng, 0.9)).expect("|a| < 1")
    };
    let (mut iso, mut cay, mut group): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..cases {
        let z = Point::disk(random_disk_point(&mut rng, 0.9)).expect("inside");
        let w = Point::disk(random_disk_point(&mut rng, 0.9)).expect("inside");
        let (g, h, k) = (aut(&mut rng), aut(&mut rng), aut(&mut rng));
        let d = poincare_disk(&z, &w).expect("disk").value();
        let (gz, gw) = (g.apply(&z).expect("disk"), g.apply(&w).expect("disk"));
        iso = iso.max((distance(&gz, &gw).expect("same model").value() - d).abs());
        let (cz, cw) = (cayley(&z).expect("disk"), cayley(&w).expect("disk"));
        cay = cay.max((poincare_halfplane(&cz, &cw).expect("half-plane").value() - d).abs());

        let gh = g.compose(&h).expect("same model");
        let lhs = gh.compose(&k).expect("same model").apply(&z).expect("disk").coord();
        let rhs = g.compose(&h.compose(&k).expect("same model")).expect("same model").apply(&z).expect("disk").coord();
        let direct = g.apply(&h.apply(&k.apply(&z).expect("disk")).expect("disk")).expect("disk").coord();
        let back = g.inverse().apply(&gz).expect("disk").coord();
        let id = g.compose(&g.inverse()).expect("same model").apply(&z).expect("disk").coord();
        group = group
            .max((lhs - rhs).norm())
            .max((lhs - direct).norm())
            .max((back - z.coord()).norm())
            .max((id - z.coord()).norm());
    }
    (iso, cay, group)
}

/// Picks the entries whose name matches a glob pattern.
pub fn select(entries: Vec<CatalogEntry>, pattern: Option<&str>) -> Result<Vec<CatalogEntry>, glob::PatternError> {
    match pattern {
        None => Ok(entries),
        Some(p) => {
            let pat = glob::Pattern::new(p)?;
            Ok(entries.into_iter().filter(|e| pat.matches(&e.name)).collect())
        }
    }
}

/// Parses `catalog:<name>` references, leaving other text untouched.
pub fn expand_map_ref(text: &str, entries: &[CatalogEntry]) -> Result<String, String> {
    match text.strip_prefix("catalog:") {
        None => Ok(text.to_string()),
        Some(name) => entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.dsl.clone())
            .ok_or_else(|| format!("unknown catalog entry '{name}'")),
    }
}
