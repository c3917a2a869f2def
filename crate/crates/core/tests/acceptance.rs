//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Reference values are recomputed here from closed forms rather than read
//! back from the library.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parabolic_lab::dynamics::{default_seeds, nontangential_diagnostic, ClassifyOptions, Classification, Frame, StepVerdict};
use parabolic_lab::geometry::{cayley, distance, MobiusAut, Model, Point};
use parabolic_lab::lab::catalog::{builtin, find};
use parabolic_lab::lab::fuzz::{fuzz_parser, random_tree, round_trips};
use parabolic_lab::lab::report::without_timestamp;
use parabolic_lab::lab::suite::{run_suite, SuiteOptions};
use parabolic_lab::map::{parse_map, ParseErrorKind};
use parabolic_lab::straightening::{
    default_grid, ensure_grid, step_via_straightening, straightening_equivalence, straightening_limit,
    StraighteningLimit, DEFAULT_MAX_N, DEFAULT_TOL,
};
use parabolic_lab::valiron::{arg_dichotomy_check, ratio_sequence, slope_propagation_check, ArgVerdict, ParabolicMap};

const N: usize = 10_000;

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dp(re: f64, im: f64) -> Point {
    Point::disk(c(re, im)).unwrap()
}

fn frame(name: &str) -> Frame {
    Frame::new(&parse_map(&find(name).unwrap().dsl).unwrap()).unwrap()
}

/// Expected classes, written out independently of the catalog data.
const EXPECTED: [(&str, &str, Option<StepVerdict>); 9] = [
    ("elliptic_rot", "elliptic", None),
    ("square", "elliptic", None),
    ("hyperbolic_2", "hyperbolic", None),
    ("hyperbolic_nonaut", "hyperbolic", None),
    ("parabolic_aut_pos", "parabolic", Some(StepVerdict::Positive)),
    ("parabolic_pos_nonaut", "parabolic", Some(StepVerdict::Positive)),
    ("parabolic_zero", "parabolic", Some(StepVerdict::Zero)),
    ("parabolic_zero_slanted", "parabolic", Some(StepVerdict::Zero)),
    ("parabolic_zero_mirrored", "parabolic", Some(StepVerdict::Positive)),
];

const PARABOLIC: [&str; 5] = [
    "parabolic_aut_pos",
    "parabolic_pos_nonaut",
    "parabolic_zero",
    "parabolic_zero_slanted",
    "parabolic_zero_mirrored",
];

/// `ω` in the disk, straight from the definition.
fn omega_disk(a: Complex64, b: Complex64) -> f64 {
    ((b - a) / (Complex64::new(1.0, 0.0) - a.conj() * b)).norm().atanh()
}

/// `ω` in the upper half-plane, straight from the definition.
fn omega_half(a: Complex64, b: Complex64) -> f64 {
    ((b - a) / (b - a.conj())).norm().atanh()
}

fn random_disk<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn limit(f: &Frame, z0: Complex64, grid: &[Complex64]) -> StraighteningLimit {
    straightening_limit(f, z0, c(0.5, 0.0), grid, DEFAULT_MAX_N, DEFAULT_TOL).unwrap()
}

fn grid() -> Vec<Complex64> {
    ensure_grid(c(0.3, 0.0), c(0.5, 0.0), &default_grid(c(0.0, 0.0), c(0.5, 0.0)))
}

fn metric_group_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut iso, mut cay, mut group, mut formula): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let (z, w) = (random_disk(&mut rng, 0.9), random_disk(&mut rng, 0.9));
        let (pz, pw) = (Point::disk(z).unwrap(), Point::disk(w).unwrap());
        let d = distance(&pz, &pw).unwrap().value();
        formula = formula.max((d - omega_disk(z, w)).abs());
        let g = MobiusAut::disk(rng.gen_range(-PI..PI), random_disk(&mut rng, 0.9)).unwrap();
        let h = MobiusAut::disk(rng.gen_range(-PI..PI), random_disk(&mut rng, 0.9)).unwrap();
        iso = iso.max((distance(&g.apply(&pz).unwrap(), &g.apply(&pw).unwrap()).unwrap().value() - d).abs());
        cay = cay.max((distance(&cayley(&pz).unwrap(), &cayley(&pw).unwrap()).unwrap().value() - d).abs());
        let composed = g.compose(&h).unwrap().apply(&pz).unwrap().coord();
        let stepwise = g.apply(&h.apply(&pz).unwrap()).unwrap().coord();
        let back = g.inverse().apply(&g.apply(&pz).unwrap()).unwrap().coord();
        group = group.max((composed - stepwise).norm()).max((back - z).norm());
    }
    let worst = iso.max(cay).max(group);
    (
        worst <= 1e-12 && formula <= 1e-12,
        format!("isometry {iso:.1e}, cayley {cay:.1e}, group {group:.1e}, vs definition {formula:.1e}"),
    )
}

fn schwarz_pick() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (name, _, _) in EXPECTED {
        let f = frame(name);
        for p in default_seeds() {
            let rec = match f.orbit(&p, N) {
                Ok(r) => r,
                Err(e) => return (false, format!("{name}: {e}")),
            };
            let omega = if rec.tau.is_some() { omega_half } else { omega_disk };
            let d: Vec<f64> = rec.points.windows(2).map(|w| omega(w[0], w[1])).collect();
            worst = d.windows(2).map(|p| p[1] - p[0]).fold(worst, f64::max);
        }
    }
    (worst <= 1e-12, format!("largest increase of d_n: {worst:.2e}"))
}

fn classification() -> Outcome {
    let opts = ClassifyOptions::default();
    let mut wrong = Vec::new();
    for (name, class, step) in EXPECTED {
        let got = Frame::new(&parse_map(&find(name).unwrap().dsl).unwrap())
            .and_then(|f| f.classify(&opts))
            .map_err(|e| e.to_string());
        match got {
            Ok(cl) if cl.name() == class && cl.step_class() == step => {
                if let Classification::Hyperbolic { lambda, .. } = cl {
                    if (lambda - 0.5).abs() > 1e-3 {
                        wrong.push(format!("{name}: lambda {lambda}"));
                    }
                }
            }
            Ok(cl) => wrong.push(format!("{name}: {} {:?}", cl.name(), cl.step_class())),
            Err(e) => wrong.push(format!("{name}: {e}")),
        }
    }
    let mut family = Vec::new();
    for a in [1.5, 2.0, 4.0] {
        let m = parse_map(&format!("invcayley . hscale({a}) . cayley")).unwrap();
        match parabolic_lab::dynamics::classify(&m, &opts) {
            Ok(Classification::Hyperbolic { lambda, .. }) => {
                let err = (lambda - 1.0 / a).abs();
                family.push(format!("{a}: {err:.1e}"));
                if err > 1e-6 {
                    wrong.push(format!("hscale({a}): lambda {lambda}"));
                }
            }
            other => wrong.push(format!("hscale({a}): {other:?}")),
        }
    }
    (wrong.is_empty(), format!("9 maps; hscale errors {}; problems {wrong:?}", family.join(", ")))
}

fn step_dichotomy() -> Outcome {
    let g = grid();
    let mut problems = Vec::new();
    // hyperbolic maps have positive step as well
    for (name, _, step) in EXPECTED.into_iter().filter(|e| e.1 != "elliptic") {
        let f = frame(name);
        let zero = step == Some(StepVerdict::Zero);
        let steps: Vec<_> = default_seeds().iter().map(|p| f.step_estimate(p, N, 1e-3).unwrap()).collect();
        let level = steps.iter().all(|s| if zero { s.s_hat <= 1e-3 } else { s.s_hat >= 0.1 });
        let uniform = steps.iter().all(|s| s.verdict == steps[0].verdict);
        let (a, b) = (limit(&f, c(0.0, 0.0), &g), limit(&f, c(0.3, 0.0), &g));
        if !level || !uniform || a.constant != zero || b.constant != zero {
            problems.push(format!("{name}: level {level}, uniform {uniform}, constant {}/{}", a.constant, b.constant));
        }
    }
    (problems.is_empty(), format!("7 boundary maps; problems {problems:?}"))
}

fn step_closed_forms() -> Outcome {
    let pos = frame("parabolic_aut_pos").step_estimate(&dp(0.0, 0.0), N, 1e-3).unwrap();
    let pos_exact = (1.0 / 5f64.sqrt()).atanh();
    let zero = frame("parabolic_zero").step_estimate(&dp(0.0, 0.0), N, 1e-3).unwrap();
    let zero_exact = (1.0 / (2.0 * N as f64 + 3.0)).atanh();
    let (e1, e2) = ((pos.s_hat - pos_exact).abs(), (zero.d_tail - zero_exact).abs());
    (e1 <= 1e-6 && e2 <= 1e-9, format!("positive {e1:.1e}, zero {e2:.1e}"))
}

fn lshs_cross_check() -> Outcome {
    let g = grid();
    let (mut step_gap, mut pair_gap): (f64, f64) = (0.0, 0.0);
    for (name, _, _) in EXPECTED {
        let f = frame(name);
        let lim = limit(&f, c(0.0, 0.0), &g);
        for p in default_seeds() {
            let s = f.step_estimate(&p, N, 1e-3).unwrap();
            if s.verdict != StepVerdict::Undecided {
                step_gap = step_gap.max((step_via_straightening(&lim, &f, &p).unwrap() - s.s_hat).abs());
            }
        }
        for k in 0..10 {
            let (i, j) = (2 + k, 3 + (5 * k + 4) % (g.len() - 3));
            let d = f.two_point_contraction(&dp(g[i].re, g[i].im), &dp(g[j].re, g[j].im), N).unwrap();
            pair_gap = pair_gap.max((d[d.len() - 1] - omega_disk(lim.values[i], lim.values[j])).abs());
        }
    }
    (step_gap <= 1e-3 && pair_gap <= 1e-3, format!("step {step_gap:.1e}, two-point {pair_gap:.1e}"))
}

fn uniqueness() -> Outcome {
    let f = frame("parabolic_aut_pos");
    let g = grid();
    match straightening_equivalence(&limit(&f, c(0.0, 0.0), &g), &limit(&f, c(0.3, 0.0), &g), 1e-3) {
        Ok(fit) => (fit.residual <= 1e-3, format!("residual {:.1e}", fit.residual)),
        Err(e) => (false, e.to_string()),
    }
}

fn valiron_ratio() -> Outcome {
    let base = dp(0.0, 0.0);
    let probes = [dp(0.5, 0.0), dp(-0.5, 0.0), dp(0.0, 0.5), dp(0.0, -0.5), dp(0.3, 0.3)];
    let (mut worst, mut monotone, mut oracle): (f64, bool, f64) = (0.0, true, 0.0);
    for name in PARABOLIC {
        let entry = find(name).unwrap();
        let pm = ParabolicMap::new(&parse_map(&entry.dsl).unwrap()).unwrap();
        for p in &probes {
            let r = ratio_sequence(&pm, p, &base, N).unwrap();
            worst = worst.max(r.error);
            monotone &= r.monotone_last_decade;
            if let Some([re, im]) = entry.translation {
                // F^N(w) = w + N b at τ = 1, Ψ(z) = i(1+z)/(1−z)
                let psi = |z: Complex64| c(0.0, 1.0) * (1.0 + z) / (1.0 - z);
                let b = c(re, im) * N as f64;
                let exact = (psi(p.coord()) + b) / (psi(base.coord()) + b);
                oracle = oracle.max((r.big_q[N] - exact).norm());
            }
        }
    }
    (
        worst <= 1e-3 && monotone && oracle <= 1e-12,
        format!("max |Q_N - 1| {worst:.1e}, monotone {monotone}, translation closed form {oracle:.1e}"),
    )
}

fn slope_dichotomy() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, want) in [
        ("parabolic_aut_pos", Some(ArgVerdict::ArgToZero)),
        ("parabolic_pos_nonaut", None),
        ("parabolic_zero_mirrored", Some(ArgVerdict::ArgToPi)),
    ] {
        let pm = ParabolicMap::new(&parse_map(&find(name).unwrap().dsl).unwrap()).unwrap();
        let rep = arg_dichotomy_check(&pm, &default_seeds(), N).unwrap();
        let (theta, sigma) = match rep.verdict {
            ArgVerdict::ArgToZero => (0.0, c(0.0, -1.0) * pm.tau()),
            ArgVerdict::ArgToPi => (PI, c(0.0, 1.0) * pm.tau()),
            _ => {
                ok = false;
                lines.push(format!("{name}: {:?}", rep.verdict));
                continue;
            }
        };
        let arg_gap = rep.slopes.iter().map(|s| (s.theta_hat - theta).abs()).fold(0.0, f64::max);
        let slope_gap = rep.slopes.iter().map(|s| (s.sigma_hat - sigma).norm()).fold(0.0, f64::max);
        ok &= arg_gap <= 1e-2 && slope_gap <= 1e-2 && want.map_or(true, |w| w == rep.verdict);
        lines.push(format!("{name}: {:?} ({arg_gap:.0e})", rep.verdict));
    }
    (ok, lines.join(", "))
}

fn slope_propagation() -> Outcome {
    let pm = ParabolicMap::new(&parse_map(&find("parabolic_zero_slanted").unwrap().dsl).unwrap()).unwrap();
    let rep = slope_propagation_check(&pm, &default_seeds(), N, 1e-2).unwrap();
    let gap = rep.slopes.iter().map(|s| (s.theta_hat - FRAC_PI_4).abs()).fold(0.0, f64::max);
    (gap <= 1e-2, format!("max |theta - pi/4| = {gap:.1e}"))
}

fn val0_consistency() -> Outcome {
    let (mut conflicts, mut violations, mut checked) = (0, 0, 0);
    for name in PARABOLIC {
        let f = frame(name);
        let zero = EXPECTED.iter().find(|e| e.0 == name).unwrap().2 == Some(StepVerdict::Zero);
        for p in default_seeds() {
            let rec = f.orbit(&p, N).unwrap();
            let diag = nontangential_diagnostic(&rec).unwrap();
            if diag.nontangential && !zero {
                conflicts += 1;
            }
            // tanh d_n <= q_n / (2 eps - q_n), q_n = |p_n / w_n|
            let eps = rec.points.iter().map(|w| w.im / w.norm()).fold(f64::INFINITY, f64::min);
            for w in rec.points.windows(2) {
                let q = ((w[1] - w[0]) / w[0]).norm();
                if 2.0 * eps - q > 0.0 {
                    checked += 1;
                    if omega_half(w[0], w[1]).tanh() > q / (2.0 * eps - q) * (1.0 + 1e-12) + 1e-15 {
                        violations += 1;
                    }
                }
            }
        }
    }
    (
        conflicts == 0 && violations == 0,
        format!("{conflicts} non-tangential orbits without zero step, {violations} bound violations of {checked}"),
    )
}

fn parser() -> Outcome {
    let catalog = builtin().iter().filter(|e| !round_trips(&parse_map(&e.dsl).unwrap())).count();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trees = (0..500)
        .filter(|k| {
            let domain = if k % 2 == 0 { Model::Disk } else { Model::HalfPlane };
            !round_trips(&random_tree(&mut rng, domain, 4))
        })
        .count();
    let seeds: Vec<String> = builtin().into_iter().map(|e| e.dsl).collect();
    let fuzz = fuzz_parser(&mut rng, 100_000, &seeds);
    let mut offsets_ok = true;
    for text in ["cayley . cayley", "rot(1) . hshift(1)", "invcayley . hscale(2) . cayley . cayley"] {
        let e = parse_map(text).unwrap_err();
        offsets_ok &= e.kind == ParseErrorKind::Type && e.offset == text.rfind('.').unwrap();
    }
    let e = parse_map("rot(x)").unwrap_err();
    offsets_ok &= e.kind == ParseErrorKind::Syntax && e.offset == 4;
    (
        catalog == 0 && trees == 0 && fuzz.crashes.is_empty() && fuzz.bad_offsets.is_empty() && offsets_ok,
        format!(
            "round trip failures {catalog}+{trees}, fuzz {} inputs {} crashes, offsets ok {offsets_ok}",
            fuzz.inputs,
            fuzz.crashes.len()
        ),
    )
}

fn determinism() -> Outcome {
    let entries = builtin();
    let a = run_suite(&entries, &SuiteOptions { jobs: 1, global: false });
    let b = run_suite(&entries, &SuiteOptions { jobs: 4, global: false });
    let mut diffs = Vec::new();
    for (x, y) in a.maps.iter().zip(&b.maps) {
        if without_timestamp(&x.report) != without_timestamp(&y.report) || x.files != y.files {
            diffs.push(x.name.clone());
        }
    }
    if without_timestamp(&a.rollup()) != without_timestamp(&b.rollup()) {
        diffs.push("roll-up".into());
    }
    (diffs.is_empty() && a.maps.len() == 9, format!("jobs 1 vs 4, differing: {diffs:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("metric and group exactness", metric_group_exactness),
        ("Schwarz-Pick monotonicity", schwarz_pick),
        ("classification", classification),
        ("step dichotomy", step_dichotomy),
        ("step closed forms", step_closed_forms),
        ("straightening step cross-check", lshs_cross_check),
        ("straightening uniqueness", uniqueness),
        ("Valiron ratio", valiron_ratio),
        ("slope dichotomy", slope_dichotomy),
        ("slope propagation", slope_propagation),
        ("non-tangential consistency", val0_consistency),
        ("parser", parser),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
