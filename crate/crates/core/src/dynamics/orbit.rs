use num_complex::Complex64;

use super::frame::ESCAPE;
use super::{DynamicsError, Frame, Result, MONOTONE_SLACK};
use crate::geometry::{distance_raw, Model, Point};
use crate::map::MapExpr;

/// Disk orbits closer than this to the circle are a collapse.
const DISK_COLLAPSE: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub map: String,
    pub start: Point,
    /// Model of the stored coordinates.
    pub model: Model,
    pub tau: Option<Complex64>,
    pub points: Vec<Complex64>,
    /// `d_n = ω(w_n, w_{n+1})`.
    pub d: Vec<f64>,
    /// `w_{n+1}/w_n`, half-plane orbits only.
    pub ratios: Vec<Complex64>,
    pub args: Vec<f64>,
    pub im: Vec<f64>,
    /// `p_n = F(w_n) − w_n`.
    pub displacement: Vec<Complex64>,
    /// The orbit left every bounded region and was cut short.
    pub escaped: bool,
}

impl OrbitRecord {
    /// Number of steps actually taken.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// `Im w_n / |w_n|` for every point.
    pub fn im_over_abs(&self) -> Vec<f64> {
        self.points.iter().map(|w| w.im / w.norm()).collect()
    }
}

/// Iterates `f` from working coordinate `w0`, stopping early on escape.
pub(crate) fn iterate_working(f: &MapExpr, w0: Complex64, n: usize) -> Result<(Vec<Complex64>, bool)> {
    let model = f.domain();
    let mut points = Vec::with_capacity(n + 1);
    points.push(w0);
    let mut w = w0;
    for step in 1..=n {
        w = f.eval_raw(w)?;
        match model {
            Model::HalfPlane if w.norm() > ESCAPE => return Ok((points, true)),
            Model::Disk if 1.0 - w.norm() < DISK_COLLAPSE => return Err(DynamicsError::BoundaryCollapse { step }),
            _ => {}
        }
        points.push(w);
    }
    Ok((points, false))
}

pub(crate) fn step_distances(model: Model, points: &[Complex64]) -> Vec<f64> {
    points.windows(2).map(|p| distance_raw(model, p[0], p[1])).collect()
}

/// How far rounding alone can move a computed distance near `w`: relative
/// errors in the coordinates scale by `|w| / Im w` in the half-plane and by
/// `1 / (1 - |z|)` in the disk.
fn rounding_floor(model: Model, w: Complex64) -> f64 {
    let cond = match model {
        Model::HalfPlane => w.norm() / w.im,
        Model::Disk => 1.0 / (1.0 - w.norm()),
    };
    16.0 * f64::EPSILON * cond
}

/// Schwarz–Pick check on `d[n] = ω(points[n], points[n+1])`.
pub(crate) fn check_monotone(model: Model, points: &[Complex64], d: &[f64]) -> Result<()> {
    for (n, pair) in d.windows(2).enumerate() {
        let slack = MONOTONE_SLACK.max(rounding_floor(model, points[n + 2]));
        if pair[1] > pair[0] + slack {
            return Err(DynamicsError::NotMonotone {
                n: n + 1,
                before: pair[0],
                after: pair[1],
            });
        }
    }
    Ok(())
}

impl Frame {
    /// Orbit of `start` with all diagnostics, in working coordinates.
    pub fn orbit(&self, start: &Point, n: usize) -> Result<OrbitRecord> {
        if n == 0 {
            return Err(DynamicsError::InvalidArgument("orbit length must be at least 1".into()));
        }
        let model = self.model();
        let w0 = self.to_working(start)?;
        let (points, escaped) = iterate_working(self.working(), w0, n)?;
        let d = step_distances(model, &points);
        check_monotone(model, &points, &d)?;
        let ratios = match model {
            Model::HalfPlane => points.windows(2).map(|p| p[1] / p[0]).collect(),
            Model::Disk => Vec::new(),
        };
        Ok(OrbitRecord {
            map: self.source().to_string(),
            start: *start,
            model,
            tau: self.tau(),
            args: points.iter().map(|w| w.arg()).collect(),
            im: points.iter().map(|w| w.im).collect(),
            displacement: points.windows(2).map(|p| p[1] - p[0]).collect(),
            ratios,
            d,
            points,
            escaped,
        })
    }

    /// `ω(fⁿz, fⁿw)` for `n = 0..=N` (shorter if an orbit escapes).
    pub fn two_point_contraction(&self, z: &Point, w: &Point, n: usize) -> Result<Vec<f64>> {
        let f = self.working();
        let (a, _) = iterate_working(f, self.to_working(z)?, n)?;
        let (b, _) = iterate_working(f, self.to_working(w)?, n)?;
        Ok(a.iter().zip(&b).map(|(p, q)| distance_raw(self.model(), *p, *q)).collect())
    }
}

/// Orbit of `start` under `m`; see [`Frame::orbit`].
pub fn orbit(m: &MapExpr, start: &Point, n: usize) -> Result<OrbitRecord> {
    Frame::new(m)?.orbit(start, n)
}

/// See [`Frame::two_point_contraction`].
pub fn two_point_contraction(m: &MapExpr, z: &Point, w: &Point, n: usize) -> Result<Vec<f64>> {
    Frame::new(m)?.two_point_contraction(z, w, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NontangentialReport {
    /// `min Im w_n / |w_n|` over the whole orbit.
    pub eps_min: f64,
    /// The same minimum over the last decade `n ≥ N/10`.
    pub eps_last_decade: f64,
    pub arg_min: f64,
    pub arg_max: f64,
    /// `ε̂ ≥ 0.05` over the last decade.
    pub nontangential: bool,
    /// Upper bound for `tanh d_n`, where its denominator is positive.
    pub bound: Vec<Option<f64>>,
    /// Indices where `tanh d_n` exceeds the bound.
    pub violations: Vec<usize>,
}

/// Threshold on `ε̂` separating tangential from non-tangential orbits.
pub const NONTANGENTIAL_EPS: f64 = 0.05;

/// Cone statistics of a half-plane orbit and the bound
/// `tanh d_n ≤ |p_n/w_n| / (2ε̂ − |p_n/w_n|)`. Disk orbits yield `None`.
pub fn nontangential_diagnostic(orbit: &OrbitRecord) -> Option<NontangentialReport> {
    if orbit.model != Model::HalfPlane {
        return None;
    }
    let ratio = orbit.im_over_abs();
    let last = orbit.points.len() - 1;
    let tail = &ratio[last / 10..];
    let eps_min = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let eps_last_decade = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_args = &orbit.args[last / 10..];
    let mut bound = Vec::with_capacity(orbit.d.len());
    let mut violations = Vec::new();
    for (n, (&d, p)) in orbit.d.iter().zip(&orbit.displacement).enumerate() {
        let q = (p / orbit.points[n]).norm();
        let den = 2.0 * eps_min - q;
        if den > 0.0 {
            let b = q / den;
            // relative slack for rounding in tanh d_n
            if d.tanh() > b * (1.0 + 1e-12) + 1e-15 {
                violations.push(n);
            }
            bound.push(Some(b));
        } else {
            bound.push(None);
        }
    }
    Some(NontangentialReport {
        eps_min,
        eps_last_decade,
        arg_min: tail_args.iter().copied().fold(f64::INFINITY, f64::min),
        arg_max: tail_args.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        nontangential: eps_last_decade >= NONTANGENTIAL_EPS,
        bound,
        violations,
    })
}
