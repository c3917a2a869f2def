use num_complex::Complex64;
use rayon::prelude::*;

use super::frame::{default_seeds, WolffKind, WolffOptions};
use super::{DynamicsError, Frame, Result, StepEstimate, StepVerdict};
use crate::accel::{floor4, richardson_at, richardson_window};
use crate::geometry::{Model, Point};
use crate::map::MapExpr;

/// Orbits used for the multiplier are stopped once `|w|` passes this radius.
const MULTIPLIER_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierEstimate {
    /// `F′(∞) = lim w_{n+1}/w_n`.
    pub lambda_inf: f64,
    /// Imaginary part of the accelerated ratio.
    pub imag: f64,
    /// Range of the accelerated ratios over the last decade.
    pub spread: f64,
    pub n_used: usize,
    /// The orbit reached the radius cap before `N` steps.
    pub capped: bool,
}

impl MultiplierEstimate {
    /// Angular derivative at the Wolff point in the disk, `1/F′(∞)`.
    pub fn disk_multiplier(&self) -> f64 {
        1.0 / self.lambda_inf
    }
}

/// Estimates `F′(∞)` for a half-plane self-map with Wolff point `∞` from the
/// ratios `w_{n+1}/w_n`.
pub fn estimate_multiplier(f: &MapExpr, w0: &Point, n: usize, tol: f64) -> Result<MultiplierEstimate> {
    if f.domain() != Model::HalfPlane || !f.is_endo() {
        return Err(DynamicsError::InvalidArgument("multiplier needs a half-plane self-map".into()));
    }
    if w0.model() != Model::HalfPlane {
        return Err(DynamicsError::InvalidArgument("multiplier needs a half-plane start point".into()));
    }
    if n < 40 {
        return Err(DynamicsError::InvalidArgument("multiplier needs N >= 40".into()));
    }
    let mut points = Vec::with_capacity(n + 1);
    let mut w = w0.coord();
    points.push(w);
    let mut capped = false;
    for _ in 0..n {
        w = f.eval_raw(w)?;
        points.push(w);
        if w.norm() > MULTIPLIER_CAP {
            capped = true;
            break;
        }
    }
    let ratios: Vec<Complex64> = points.windows(2).map(|p| p[1] / p[0]).collect();
    let m = ratios.len() - 1;
    let (value, spread) = if capped || m < 40 {
        // geometric growth: the ratio has already settled
        let prev = if m > 0 { ratios[m - 1] } else { ratios[m] };
        (ratios[m], (ratios[m] - prev).norm())
    } else {
        let k = floor4(m);
        let window = richardson_window(&ratios, m / 10, k);
        let lo = window.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
        let hi = window.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        (richardson_at(&ratios, k), hi - lo)
    };
    let est = MultiplierEstimate {
        lambda_inf: value.re,
        imag: value.im,
        spread,
        n_used: m + 1,
        capped,
    };
    if spread > tol {
        return Err(DynamicsError::Undecided(format!("ratio sequence spread {spread:.3e} exceeds {tol:e}")));
    }
    if value.im.abs() > tol {
        return Err(DynamicsError::Undecided(format!(
            "ratio limit has imaginary part {:.3e}; orbit does not approach infinity radially",
            value.im
        )));
    }
    Ok(est)
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub wolff: WolffOptions,
    /// Iterations for the multiplier.
    pub n: usize,
    pub tol_class: f64,
    pub step_n: usize,
    pub eps_zero: f64,
    /// Probe points for the step.
    pub probes: Vec<Point>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            wolff: WolffOptions::default(),
            n: 100_000,
            tol_class: 1e-3,
            step_n: super::DEFAULT_STEP_N,
            eps_zero: super::DEFAULT_EPS_ZERO,
            probes: default_seeds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Elliptic {
        fixed: Complex64,
        multiplier: Complex64,
    },
    Hyperbolic {
        tau: Complex64,
        lambda: f64,
    },
    Parabolic {
        tau: Complex64,
        /// Common verdict of all probes, `Undecided` if they disagree.
        step_class: StepVerdict,
        steps: Vec<StepEstimate>,
    },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Elliptic { .. } => "elliptic",
            Classification::Hyperbolic { .. } => "hyperbolic",
            Classification::Parabolic { .. } => "parabolic",
        }
    }

    pub fn is_decided(&self) -> bool {
        !matches!(
            self,
            Classification::Parabolic {
                step_class: StepVerdict::Undecided,
                ..
            }
        )
    }

    pub fn step_class(&self) -> Option<StepVerdict> {
        match self {
            Classification::Parabolic { step_class, .. } => Some(*step_class),
            _ => None,
        }
    }
}

impl Frame {
    /// Multiplier of the working map from the image of the disk center.
    pub fn multiplier(&self, n: usize, tol: f64) -> Result<MultiplierEstimate> {
        let w0 = Point::new(self.to_working(&Point::center(Model::Disk))?, self.model())?;
        estimate_multiplier(self.working(), &w0, n, tol)
    }

    pub fn classify(&self, opts: &ClassifyOptions) -> Result<Classification> {
        let tau = match self.wolff().kind {
            WolffKind::InteriorFixed { point, multiplier } => {
                return Ok(Classification::Elliptic {
                    fixed: point,
                    multiplier,
                })
            }
            WolffKind::Boundary { tau } => tau,
        };
        let mult = self
            .multiplier(opts.n, opts.tol_class)
            .map_err(|e| DynamicsError::Undecided(format!("boundary Wolff point {tau}, multiplier: {e}")))?;
        let lambda = mult.disk_multiplier();
        if lambda <= 1.0 - opts.tol_class {
            return Ok(Classification::Hyperbolic { tau, lambda });
        }
        if (lambda - 1.0).abs() >= opts.tol_class {
            return Err(DynamicsError::Undecided(format!(
                "boundary Wolff point {tau} with multiplier estimate {lambda}"
            )));
        }
        let steps = opts
            .probes
            .par_iter()
            .map(|p| self.step_estimate(p, opts.step_n, opts.eps_zero))
            .collect::<Result<Vec<_>>>()?;
        let first = steps.first().map(|s| s.verdict).unwrap_or(StepVerdict::Undecided);
        let step_class = if steps.iter().all(|s| s.verdict == first) {
            first
        } else {
            StepVerdict::Undecided
        };
        Ok(Classification::Parabolic { tau, step_class, steps })
    }
}

/// Elliptic / hyperbolic / parabolic classification of a self-map.
pub fn classify(m: &MapExpr, opts: &ClassifyOptions) -> Result<Classification> {
    Frame::with_options(m, &opts.wolff)?.classify(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::parse_map;

    fn at_i() -> Point {
        Point::half_plane(Complex64::i()).unwrap()
    }

    fn mult(text: &str, n: usize) -> MultiplierEstimate {
        estimate_multiplier(&parse_map(text).unwrap(), &at_i(), n, 1e-3).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(mult("hscale(2)", 10_000).lambda_inf, 2.0);
        let m = mult("hshift(1)", 10_000);
        assert!((m.lambda_inf - 1.0).abs() < 1e-10);
        let m = mult("hnudge(1)", 100_000);
        assert!((m.lambda_inf - 1.0).abs() < 1e-6);
    }

    #[test]
    fn classifies_basic_maps() {
        let opts = ClassifyOptions::default();
        let c = classify(&parse_map("invcayley . hscale(2) . cayley").unwrap(), &opts).unwrap();
        let Classification::Hyperbolic { tau, lambda } = c else { panic!("{c:?}") };
        assert_eq!(tau, Complex64::new(1.0, 0.0));
        assert!((lambda - 0.5).abs() < 1e-12);

        let c = classify(&parse_map("invcayley . hshift(1) . cayley").unwrap(), &opts).unwrap();
        assert_eq!(c.step_class(), Some(StepVerdict::Positive));
        let c = classify(&parse_map("invcayley . hshift(1i) . cayley").unwrap(), &opts).unwrap();
        assert_eq!(c.step_class(), Some(StepVerdict::Zero));
        let c = classify(&parse_map("blaschke(0;(0,2))").unwrap(), &opts).unwrap();
        assert_eq!(c.name(), "elliptic");
    }
}
