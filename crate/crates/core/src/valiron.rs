//! Ratio and slope limits of parabolic iteration.
//!
//! With `F` the half-plane conjugate whose Wolff point is `∞`, the disk-side
//! quantities are read off the half-plane orbit through
//! `fⁿ(z) − τ = −2iτ/(Fⁿ(w) + i)`, so `fⁿ(z) − τ` is never formed directly.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::accel::{floor4, richardson_at, richardson_window};
use crate::dynamics::{iterate_working as iterate, ClassifyOptions, Classification, DynamicsError, Frame, StepVerdict};
use crate::geometry::Point;
use crate::map::MapExpr;

/// Angle sequences are accepted as convergent when the accelerated values
/// over the last decade stay within this range (radians).
pub const SLOPE_RANGE: f64 = 1e-3;
/// Window around 0 and π for the argument dichotomy.
pub const ARG_WINDOW: f64 = 1e-2;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValironError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("map not parabolic (classified as {0})")]
    NotParabolic(&'static str),
    #[error("map has no boundary Wolff point")]
    NoBoundaryWolff,
    #[error("argument dichotomy needs a positive hyperbolic step, got {0:?}")]
    RequiresPositiveStep(StepVerdict),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ValironError>;

/// A map verified to be parabolic, with the frame its dynamics run in.
#[derive(Clone, Debug)]
pub struct ParabolicMap {
    frame: Frame,
    classification: Classification,
    tau: Complex64,
}

impl ParabolicMap {
    pub fn new(m: &MapExpr) -> Result<Self> {
        Self::with_options(m, &ClassifyOptions::default())
    }

    pub fn with_options(m: &MapExpr, opts: &ClassifyOptions) -> Result<Self> {
        let frame = Frame::with_options(m, &opts.wolff)?;
        let classification = frame.classify(opts)?;
        Self::from_parts(frame, classification)
    }

    pub fn from_parts(frame: Frame, classification: Classification) -> Result<Self> {
        match classification {
            Classification::Parabolic { tau, .. } => Ok(Self {
                frame,
                classification,
                tau,
            }),
            other => Err(ValironError::NotParabolic(other.name())),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn step_class(&self) -> StepVerdict {
        self.classification.step_class().expect("parabolic by construction")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub map: String,
    pub base: Point,
    pub probe: Point,
    /// `(fⁿ(z) − τ)/(fⁿ(z₀) − τ)`.
    pub q: Vec<Complex64>,
    /// `Fⁿ(w)/Fⁿ(w₀)`.
    pub big_q: Vec<Complex64>,
    /// `|Q_N − 1|`.
    pub error: f64,
    /// `|q_N − 1|`.
    pub disk_error: f64,
    /// `|Q_n − 1|` is non-increasing over the last decade.
    pub monotone_last_decade: bool,
    /// Largest increase of `|Q_n − 1|` over the last decade.
    pub worst_increase: f64,
}

/// Ratio sequences for the probe `z` against the base `z₀`.
pub fn ratio_sequence(pm: &ParabolicMap, z: &Point, z0: &Point, n: usize) -> Result<RatioReport> {
    if n < 10 {
        return Err(ValironError::InvalidArgument("ratio sequence needs N >= 10".into()));
    }
    let frame = pm.frame();
    let f = frame.working();
    let (a, _) = iterate(f, frame.to_working(z)?, n)?;
    let (b, _) = iterate(f, frame.to_working(z0)?, n)?;
    let big_q: Vec<Complex64> = a.iter().zip(&b).map(|(w, w0)| w / w0).collect();
    let q: Vec<Complex64> = a.iter().zip(&b).map(|(w, w0)| (w0 + I) / (w + I)).collect();
    let last = big_q.len() - 1;
    let errs: Vec<f64> = big_q.iter().map(|x| (x - 1.0).norm()).collect();
    let worst_increase = errs[last / 10..]
        .windows(2)
        .map(|e| e[1] - e[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioReport {
        map: frame.source().to_string(),
        base: *z0,
        probe: *z,
        error: errs[last],
        disk_error: (q[last] - 1.0).norm(),
        monotone_last_decade: worst_increase <= 1e-15,
        worst_increase,
        q,
        big_q,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeReport {
    pub map: String,
    pub probe: Point,
    /// `(fⁿ(z) − τ)/|fⁿ(z) − τ|`.
    pub sigma: Vec<Complex64>,
    /// `arg Fⁿ(w)`.
    pub args: Vec<f64>,
    /// Accelerated limit of `arg Fⁿ(w)`.
    pub theta_hat: f64,
    /// Disk slope `τ(−i)e^{−iθ̂}`.
    pub sigma_hat: Complex64,
    /// Range of the accelerated arguments over the last decade.
    pub range_last_decade: f64,
    pub converged: bool,
    /// `max | |σ_n| − 1 |`.
    pub unit_error: f64,
}

/// Slope sequence of `z` for a map with a boundary Wolff point.
pub fn slope_sequence(frame: &Frame, z: &Point, n: usize) -> Result<SlopeReport> {
    let tau = frame.tau().ok_or(ValironError::NoBoundaryWolff)?;
    if n < 40 {
        return Err(ValironError::InvalidArgument("slope sequence needs N >= 40".into()));
    }
    let (w, _) = iterate(frame.working(), frame.to_working(z)?, n)?;
    let sigma: Vec<Complex64> = w
        .iter()
        .map(|x| {
            let s = (x + I).conj();
            tau * (-I) * s / s.norm()
        })
        .collect();
    let args: Vec<f64> = w.iter().map(|x| x.arg()).collect();
    let last = args.len() - 1;
    let (theta_hat, range) = if last >= 40 {
        let window = richardson_window(&args, last / 10, last);
        let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (richardson_at(&args, floor4(last)), hi - lo)
    } else {
        // escaped early: geometric approach, use the last value
        (args[last], (args[last] - args[last.saturating_sub(1)]).abs())
    };
    let unit_error = sigma.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(SlopeReport {
        map: frame.source().to_string(),
        probe: *z,
        sigma,
        args,
        theta_hat,
        sigma_hat: tau * (-I) * Complex64::from_polar(1.0, -theta_hat),
        range_last_decade: range,
        converged: range < SLOPE_RANGE,
        unit_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Propagation {
    /// Every probe reaches the same angle `theta`.
    Agree { theta: f64 },
    /// Some probe's angle is farther than the tolerance from the converged one.
    Disagree { max_gap: f64 },
    /// Fewer than two probes, or no probe converged.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationReport {
    pub verdict: Propagation,
    pub slopes: Vec<SlopeReport>,
}

/// Checks that all probes share the slope of any probe whose slope converges.
pub fn slope_propagation_check(pm: &ParabolicMap, probes: &[Point], n: usize, tol: f64) -> Result<PropagationReport> {
    let slopes = probes
        .par_iter()
        .map(|p| slope_sequence(pm.frame(), p, n))
        .collect::<Result<Vec<_>>>()?;
    let reference = slopes.iter().find(|s| s.converged).map(|s| s.theta_hat);
    let verdict = match reference {
        Some(theta) if slopes.len() >= 2 => {
            let max_gap = slopes.iter().map(|s| (s.theta_hat - theta).abs()).fold(0.0, f64::max);
            if max_gap <= tol {
                Propagation::Agree { theta }
            } else {
                Propagation::Disagree { max_gap }
            }
        }
        _ => Propagation::Vacuous,
    };
    Ok(PropagationReport { verdict, slopes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgVerdict {
    ArgToZero,
    ArgToPi,
    Violation,
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArgDichotomyReport {
    pub verdict: ArgVerdict,
    pub slopes: Vec<SlopeReport>,
}

/// For positive-step parabolic maps, checks that `arg Fⁿ(w)` tends to the
/// same element of `{0, π}` for every probe.
pub fn arg_dichotomy_check(pm: &ParabolicMap, probes: &[Point], n: usize) -> Result<ArgDichotomyReport> {
    let step = pm.step_class();
    if step != StepVerdict::Positive {
        return Err(ValironError::RequiresPositiveStep(step));
    }
    let slopes = probes
        .par_iter()
        .map(|p| slope_sequence(pm.frame(), p, n))
        .collect::<Result<Vec<_>>>()?;
    let near = |s: &SlopeReport, target: f64| (s.theta_hat - target).abs() < ARG_WINDOW;
    let converged: Vec<&SlopeReport> = slopes.iter().filter(|s| s.converged).collect();
    let verdict = if converged
        .iter()
        .any(|s| !near(s, 0.0) && !near(s, std::f64::consts::PI))
    {
        ArgVerdict::Violation
    } else if converged.iter().any(|s| near(s, 0.0)) && converged.iter().any(|s| near(s, std::f64::consts::PI)) {
        ArgVerdict::Violation
    } else if converged.len() < slopes.len() || slopes.is_empty() {
        ArgVerdict::Undecided
    } else if near(&slopes[0], 0.0) {
        ArgVerdict::ArgToZero
    } else {
        ArgVerdict::ArgToPi
    };
    Ok(ArgDichotomyReport { verdict, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::default_seeds;
    use crate::map::parse_map;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pm(text: &str) -> ParabolicMap {
        ParabolicMap::new(&parse_map(text).unwrap()).unwrap()
    }

    fn hp(re: f64, im: f64) -> Point {
        Point::half_plane(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn refuses_non_parabolic_maps() {
        let err = ParabolicMap::new(&parse_map("invcayley . hscale(2) . cayley").unwrap()).unwrap_err();
        assert_eq!(err, ValironError::NotParabolic("hyperbolic"));
        assert!(err.to_string().contains("map not parabolic"));
    }

    #[test]
    fn ratio_examples() {
        let p = pm("invcayley . hshift(1) . cayley");
        let same = ratio_sequence(&p, &hp(0.0, 1.0), &hp(0.0, 1.0), 100).unwrap();
        assert!(same.big_q.iter().all(|q| *q == Complex64::new(1.0, 0.0)));
        let r = ratio_sequence(&p, &hp(0.0, 2.0), &hp(0.0, 1.0), 10_000).unwrap();
        let exact = Complex64::new(10_000.0, 2.0) / Complex64::new(10_000.0, 1.0);
        assert!((r.big_q[10_000] - exact).norm() < 1e-15);
        assert!((r.error - 1e-4).abs() < 1e-7);
        assert!(r.monotone_last_decade);

        let p = pm("invcayley . hshift(1i) . cayley");
        let r = ratio_sequence(&p, &hp(1.0, 1.0), &hp(0.0, 1.0), 10_000).unwrap();
        assert!((r.error - 1.0 / 10_001.0).abs() < 1e-12);
    }

    #[test]
    fn slope_examples() {
        let p = pm("invcayley . hshift(1) . cayley");
        let s = slope_sequence(p.frame(), &hp(0.0, 1.0), 10_000).unwrap();
        assert!(s.converged && s.theta_hat.abs() < 1e-9);
        assert!((s.sigma_hat + I).norm() < 1e-9);
        assert!(s.unit_error < 1e-12);

        let p = pm("invcayley . hshift(1+1i) . cayley");
        let s = slope_sequence(p.frame(), &hp(0.0, 1.0), 10_000).unwrap();
        assert!((s.theta_hat - FRAC_PI_4).abs() < 1e-9);

        let p = pm("invcayley . hshift(1i) . cayley");
        let s = slope_sequence(p.frame(), &hp(0.0, 1.0), 1000).unwrap();
        assert!(s.args.iter().all(|a| (a - FRAC_PI_2).abs() < 1e-15));
        assert!((s.sigma_hat + 1.0).norm() < 1e-12);
    }

    #[test]
    fn truncated_runs_report_no_limit() {
        let p = pm("invcayley . hnudge(1) . cayley");
        let s = slope_sequence(p.frame(), &hp(0.0, 1.0), 40).unwrap();
        assert!(!s.converged, "{}", s.range_last_decade);
    }

    #[test]
    fn propagation_and_dichotomy() {
        let probes = default_seeds();
        let p = pm("invcayley . hshift(1+1i) . cayley");
        let rep = slope_propagation_check(&p, &probes, 10_000, 1e-2).unwrap();
        assert!(matches!(rep.verdict, Propagation::Agree { theta } if (theta - FRAC_PI_4).abs() < 1e-2));
        let single = slope_propagation_check(&p, &probes[..1], 10_000, 1e-2).unwrap();
        assert_eq!(single.verdict, Propagation::Vacuous);
        assert!(matches!(
            arg_dichotomy_check(&p, &probes, 10_000),
            Err(ValironError::RequiresPositiveStep(StepVerdict::Zero))
        ));

        let rep = arg_dichotomy_check(&pm("invcayley . hshift(1) . cayley"), &probes, 10_000).unwrap();
        assert_eq!(rep.verdict, ArgVerdict::ArgToZero);
        let rep = arg_dichotomy_check(&pm("invcayley . hshift(-1) . cayley"), &probes, 10_000).unwrap();
        assert_eq!(rep.verdict, ArgVerdict::ArgToPi);
        assert!(rep.slopes.iter().all(|s| (s.theta_hat - PI).abs() < 1e-2));
        let rep = arg_dichotomy_check(&pm("invcayley . hnudge(1) . cayley"), &probes, 10_000).unwrap();
        assert_eq!(rep.verdict, ArgVerdict::ArgToZero);
    }
}
