//! Left straightenings `H_n = γ_n⁻¹ ∘ fⁿ` of the iterates of a self-map.
//!
//! `γ_n` is the automorphism sending 0 to `fⁿ(z₀)`, followed by the rotation
//! that makes `H_n(w₀)` a non-negative real. With a boundary Wolff point the
//! normalization is done in half-plane coordinates,
//! `Ψ⁻¹((Fⁿ(w) − Re W_n)/Im W_n)` with `W_n = Fⁿ(Ψ(z₀))`, which avoids
//! subtracting two nearly unimodular numbers.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{DynamicsError, Frame, FrameKind};
use crate::geometry::{cayley_inverse_raw, disk_aut_through_three_points, disk_distance_raw, GeometryError, MobiusAut, Model, Point};
use crate::map::EvalError;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_N: usize = 1 << 17;
/// Allowed increase of `|H_n|` between consecutive `n`.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Minimum pairwise distance of the three points used for a fit.
const MIN_SEPARATION: f64 = 1e-3;
const ESCAPE: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StraighteningError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not converged at n = {n}: last sup-change {last_change:e}")]
    NotConverged { n: usize, last_change: f64 },
    #[error("|H_n| increased by {increase:e} at grid point {index}")]
    NotMonotone { index: usize, increase: f64 },
    #[error("no automorphism relates the two straightenings (residual {residual:e})")]
    NoFit { residual: f64 },
    #[error("degenerate grid images: {0}")]
    Degenerate(String),
}

impl From<EvalError> for StraighteningError {
    fn from(e: EvalError) -> Self {
        StraighteningError::Dynamics(e.into())
    }
}

pub type Result<T> = std::result::Result<T, StraighteningError>;

/// `z₀`, `w₀` and 23 points on the circles of radius 0.3 (11 points) and 0.6 (12 points).
pub fn default_grid(z0: Complex64, w0: Complex64) -> Vec<Complex64> {
    let mut grid = vec![z0, w0];
    for (r, count) in [(0.3, 11), (0.6, 12)] {
        for k in 0..count {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            grid.push(Complex64::from_polar(r, t));
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq)]
pub struct StraighteningRecord {
    pub base: Complex64,
    pub reference: Complex64,
    pub n: usize,
    pub grid: Vec<Complex64>,
    /// `H_n` on the grid.
    pub values: Vec<Complex64>,
    /// `H_n(w₀)`, real and non-negative unless the pair collapsed.
    pub at_reference: Complex64,
    /// `fⁿ(w₀) = fⁿ(z₀)` numerically; no rotation was applied.
    pub collapsed: bool,
    /// `sup_grid |H_n − H_{n−1}|`, absent for `n = 0`.
    pub sup_change: Option<f64>,
    /// Largest increase of `|H_k|` over `k ≤ n` and the grid (non-positive when monotone).
    pub monotone_margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StraighteningLimit {
    pub base: Complex64,
    pub reference: Complex64,
    pub grid: Vec<Complex64>,
    /// `ĥ` on the grid.
    pub values: Vec<Complex64>,
    /// Index of the accepted iterate.
    pub n: usize,
    pub converged: bool,
    /// `sup_grid |H_n − H_{n/2}|` at acceptance.
    pub last_change: f64,
    /// `sup_grid ω(ĥ(z), ĥ(z₀))`.
    pub spread: f64,
    pub constant: bool,
    pub monotone_margin: f64,
    pub collapsed: bool,
    /// `H_n` on the grid at `n = 1, 2, 4, …` up to the accepted index.
    pub checkpoints: Vec<(usize, Vec<Complex64>)>,
}

impl StraighteningLimit {
    /// `ĥ` at a grid point.
    pub fn value_at(&self, z: Complex64) -> Option<Complex64> {
        self.grid.iter().position(|g| *g == z).map(|k| self.values[k])
    }
}

/// Iterates the base, reference and grid orbits in lockstep.
struct Engine<'a> {
    frame: &'a Frame,
    n: usize,
    base: Complex64,
    reference: Complex64,
    points: Vec<Complex64>,
    margin: f64,
    /// `H_{n−1}` on the grid, once `n ≥ 1`.
    previous: Option<Vec<Complex64>>,
}

impl<'a> Engine<'a> {
    fn new(frame: &'a Frame, z0: Complex64, w0: Complex64, grid: &[Complex64]) -> Result<Self> {
        let work = |z: Complex64| -> Result<Complex64> { Ok(frame.to_working(&Point::disk(z)?)?) };
        Ok(Self {
            frame,
            n: 0,
            base: work(z0)?,
            reference: work(w0)?,
            points: grid.iter().map(|&z| work(z)).collect::<Result<_>>()?,
            margin: f64::NEG_INFINITY,
            previous: None,
        })
    }

    /// `μ_{−a_n}(x)` up to rotation, for working coordinates.
    fn normalize(kind: FrameKind, base: Complex64, x: Complex64) -> Complex64 {
        match kind {
            FrameKind::HalfPlane { .. } => cayley_inverse_raw((x - base.re) / base.im),
            FrameKind::Disk => (x - base) / (Complex64::new(1.0, 0.0) - base.conj() * x),
        }
    }

    fn rotation(kind: FrameKind, base: Complex64, reference: Complex64) -> (Complex64, bool) {
        let r = Self::normalize(kind, base, reference);
        if r.norm() == 0.0 {
            (Complex64::new(1.0, 0.0), true)
        } else {
            (r.conj() / r.norm(), false)
        }
    }

    fn values_at(&self, base: Complex64, reference: Complex64, points: &[Complex64]) -> (Vec<Complex64>, Complex64, bool) {
        let kind = self.frame.kind();
        let (rot, collapsed) = Self::rotation(kind, base, reference);
        let values = points.iter().map(|&x| rot * Self::normalize(kind, base, x)).collect();
        (values, rot * Self::normalize(kind, base, reference), collapsed)
    }

    fn step(f: &crate::map::MapExpr, w: Complex64) -> Result<Complex64> {
        let v = f.eval_raw(w)?;
        if v.norm() > ESCAPE {
            return Err(DynamicsError::InvalidArgument("orbit escaped before the straightening settled".into()).into());
        }
        Ok(v)
    }

    /// Advances every orbit to index `target`.
    fn advance_to(&mut self, target: usize) -> Result<()> {
        if target <= self.n {
            return Ok(());
        }
        let f = self.frame.working();
        let kind = self.frame.kind();
        // normalization data for n+1..=target
        let mut bases = Vec::with_capacity(target - self.n);
        let (mut b, mut r) = (self.base, self.reference);
        let (mut b_prev, mut r_prev) = (b, r);
        for _ in self.n..target {
            b_prev = b;
            r_prev = r;
            b = Self::step(f, b)?;
            r = Self::step(f, r)?;
            bases.push(b);
        }
        let base0 = self.base;
        let advanced: Vec<(Complex64, Complex64, f64)> = self
            .points
            .par_iter()
            .map(|&x0| -> Result<(Complex64, Complex64, f64)> {
                let mut x = x0;
                let mut x_prev = x0;
                let mut modulus = Self::normalize(kind, base0, x0).norm();
                let mut margin = f64::NEG_INFINITY;
                for base in &bases {
                    x_prev = x;
                    x = Self::step(f, x)?;
                    let m = Self::normalize(kind, *base, x).norm();
                    margin = margin.max(m - modulus);
                    modulus = m;
                }
                Ok((x, x_prev, margin))
            })
            .collect::<Result<_>>()?;
        let prev_points: Vec<Complex64> = advanced.iter().map(|a| a.1).collect();
        self.previous = Some(self.values_at(b_prev, r_prev, &prev_points).0);
        self.points = advanced.iter().map(|a| a.0).collect();
        self.margin = advanced.iter().map(|a| a.2).fold(self.margin, f64::max);
        self.base = b;
        self.reference = r;
        self.n = target;
        Ok(())
    }

    fn record(&self, base: Complex64, reference: Complex64, grid: &[Complex64]) -> StraighteningRecord {
        let (values, at_reference, collapsed) = self.values_at(self.base, self.reference, &self.points);
        let sup_change = self.previous.as_ref().map(|prev| sup_diff(prev, &values));
        StraighteningRecord {
            base,
            reference,
            n: self.n,
            grid: grid.to_vec(),
            values,
            at_reference,
            collapsed,
            sup_change,
            monotone_margin: self.margin,
        }
    }
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check_inputs(z0: Complex64, w0: Complex64, grid: &[Complex64]) -> Result<()> {
    if z0 == w0 {
        return Err(StraighteningError::InvalidArgument("base and reference points must differ".into()));
    }
    for z in [z0, w0].iter().chain(grid) {
        Point::disk(*z)?;
    }
    Ok(())
}

/// Grid with `z₀` and `w₀` prepended when missing.
pub fn ensure_grid(z0: Complex64, w0: Complex64, grid: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(grid.len() + 2);
    for z in [z0, w0] {
        if !grid.contains(&z) {
            out.push(z);
        }
    }
    out.extend_from_slice(grid);
    out
}

/// `H_n` on `grid` for disk points `z₀ ≠ w₀`.
pub fn straightened_iterate(
    frame: &Frame,
    z0: Complex64,
    w0: Complex64,
    n: usize,
    grid: &[Complex64],
) -> Result<StraighteningRecord> {
    let grid = ensure_grid(z0, w0, grid);
    check_inputs(z0, w0, &grid)?;
    let mut engine = Engine::new(frame, z0, w0, &grid)?;
    engine.advance_to(n)?;
    let rec = engine.record(z0, w0, &grid);
    if rec.monotone_margin > MONOTONE_SLACK {
        return Err(StraighteningError::NotMonotone {
            index: 0,
            increase: rec.monotone_margin,
        });
    }
    Ok(rec)
}

/// Runs the straightening through `n = 1, 2, 4, …` until `H_n` and `H_{2n}`
/// agree on the grid to within `tol`.
pub fn straightening_limit(
    frame: &Frame,
    z0: Complex64,
    w0: Complex64,
    grid: &[Complex64],
    max_n: usize,
    tol: f64,
) -> Result<StraighteningLimit> {
    let grid = ensure_grid(z0, w0, grid);
    check_inputs(z0, w0, &grid)?;
    let mut engine = Engine::new(frame, z0, w0, &grid)?;
    engine.advance_to(1)?;
    let mut last = engine.record(z0, w0, &grid);
    let mut checkpoints = vec![(1, last.values.clone())];
    let mut last_change = f64::INFINITY;
    let mut n = 1;
    while 2 * n <= max_n {
        n *= 2;
        match engine.advance_to(n) {
            Ok(()) => {}
            Err(_) if last_change.is_finite() => {
                return Err(StraighteningError::NotConverged { n: n / 2, last_change });
            }
            Err(e) => return Err(e),
        }
        let rec = engine.record(z0, w0, &grid);
        if rec.monotone_margin > MONOTONE_SLACK {
            return Err(StraighteningError::NotMonotone {
                index: 0,
                increase: rec.monotone_margin,
            });
        }
        last_change = sup_diff(&last.values, &rec.values);
        checkpoints.push((n, rec.values.clone()));
        last = rec;
        if last_change < tol {
            let spread = last.values.iter().map(|h| disk_distance_raw(*h, last.values[0])).fold(0.0, f64::max);
            return Ok(StraighteningLimit {
                base: z0,
                reference: w0,
                grid,
                values: last.values,
                n,
                converged: true,
                last_change,
                spread,
                constant: spread < 10.0 * tol,
                monotone_margin: last.monotone_margin,
                collapsed: last.collapsed,
                checkpoints,
            });
        }
    }
    Err(StraighteningError::NotConverged { n, last_change })
}

/// `ω(ĥ(z), ĥ(f(z)))`, evaluating `ĥ` by running the straightening at `z` and `f(z)`.
pub fn step_via_straightening(limit: &StraighteningLimit, frame: &Frame, z: &Point) -> Result<f64> {
    if !limit.converged {
        return Err(StraighteningError::InvalidArgument("straightening has not converged".into()));
    }
    let wz = frame.to_working(z)?;
    let fz = frame.working().eval_raw(wz)?;
    let (dz, dfz) = (frame.to_disk(wz), frame.to_disk(fz));
    let rec = straightened_iterate(frame, limit.base, limit.reference, limit.n, &[dz, dfz])?;
    let k = rec.values.len();
    Ok(disk_distance_raw(rec.values[k - 2], rec.values[k - 1]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceFit {
    /// `φ` with `φ ∘ ĥ_b ≈ ĥ_a`.
    pub phi: MobiusAut,
    pub residual: f64,
    /// Grid indices the fit was pinned to.
    pub triple: [usize; 3],
}

/// Fits a disk automorphism relating two straightening limits on a common grid.
pub fn straightening_equivalence(a: &StraighteningLimit, b: &StraighteningLimit, tol: f64) -> Result<EquivalenceFit> {
    if a.grid.len() != b.grid.len() || a.grid.iter().zip(&b.grid).any(|(x, y)| (x - y).norm() > 1e-15) {
        // grids may be ordered differently; match by value
        let mut idx = Vec::with_capacity(a.grid.len());
        for g in &a.grid {
            match b.grid.iter().position(|h| (g - h).norm() <= 1e-15) {
                Some(k) => idx.push(k),
                None => return Err(StraighteningError::InvalidArgument("limits were computed on different grids".into())),
            }
        }
        let reordered = StraighteningLimit {
            grid: a.grid.clone(),
            values: idx.iter().map(|&k| b.values[k]).collect(),
            ..b.clone()
        };
        return straightening_equivalence(a, &reordered, tol);
    }
    match (a.constant, b.constant) {
        (true, true) => return Err(StraighteningError::Degenerate("both limits are constant".into())),
        (true, false) | (false, true) => {
            let residual = a.spread.max(b.spread);
            return Err(StraighteningError::NoFit { residual });
        }
        _ => {}
    }
    let n = a.grid.len();
    let mut best = (f64::NEG_INFINITY, [0, 1, 2]);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let sep = [
                    disk_distance_raw(b.values[i], b.values[j]),
                    disk_distance_raw(b.values[i], b.values[k]),
                    disk_distance_raw(b.values[j], b.values[k]),
                    disk_distance_raw(a.values[i], a.values[j]),
                    disk_distance_raw(a.values[i], a.values[k]),
                    disk_distance_raw(a.values[j], a.values[k]),
                ]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
                if sep > best.0 {
                    best = (sep, [i, j, k]);
                }
            }
        }
    }
    let (sep, triple) = best;
    if sep < MIN_SEPARATION {
        return Err(StraighteningError::Degenerate(format!("grid images closer than {sep:e}")));
    }
    let pts = |v: &[Complex64]| -> Result<[Point; 3]> {
        Ok([Point::disk(v[triple[0]])?, Point::disk(v[triple[1]])?, Point::disk(v[triple[2]])?])
    };
    let phi = disk_aut_through_three_points(&pts(&b.values)?, &pts(&a.values)?, f64::INFINITY)?;
    let residual = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(ha, hb)| {
            let image = phi.apply(&Point::disk(*hb).expect("limit values lie in the disk"));
            image.map_or(f64::INFINITY, |p| disk_distance_raw(p.coord(), *ha))
        })
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(StraighteningError::NoFit { residual });
    }
    Ok(EquivalenceFit { phi, residual, triple })
}

/// Disk coordinate of `p` as seen by `frame`.
pub fn disk_point(frame: &Frame, p: &Point) -> Result<Complex64> {
    Ok(match p.model() {
        Model::Disk => p.coord(),
        Model::HalfPlane => frame.to_disk(frame.to_working(p)?),
    })
}
