use num_complex::Complex64;
use rayon::prelude::*;

use super::{DynamicsError, Result};
use crate::accel::{floor4, richardson_at};
use crate::geometry::{cayley_inverse_raw, cayley_raw, Model, Point};
use crate::map::{factors, simplify, MapExpr, Primitive};

/// Escape radius used to stop half-plane orbits.
pub(crate) const ESCAPE: f64 = 1e300;
/// Disk orbits this close to the circle are treated as having reached it.
const DISK_STOP: f64 = 1e-14;
/// Minimum distance of an accepted interior fixed point from the circle.
const INTERIOR_MARGIN: f64 = 1e-4;
/// Every seed must end at least this close to the circle for a boundary verdict.
const BOUNDARY_REACH: f64 = 1e-3;

/// Default seeds `{0, ±0.5, ±0.5i}` in the disk.
pub fn default_seeds() -> Vec<Point> {
    [(0.0, 0.0), (0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)]
        .into_iter()
        .map(|(re, im)| Point::disk(Complex64::new(re, im)).expect("seed inside the disk"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct WolffOptions {
    pub seeds: Vec<Point>,
    pub n: usize,
    pub tol: f64,
}

impl Default for WolffOptions {
    fn default() -> Self {
        Self {
            seeds: default_seeds(),
            n: 10_000,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WolffKind {
    /// Interior fixed point (disk coordinates) and `f′` there.
    InteriorFixed { point: Complex64, multiplier: Complex64 },
    /// Boundary Wolff point on the unit circle.
    Boundary { tau: Complex64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WolffEstimate {
    pub kind: WolffKind,
    /// Fixed-point residual, or the last change of the boundary projection.
    pub last_step: f64,
    /// Largest disagreement between seeds.
    pub seed_spread: f64,
}

impl WolffEstimate {
    pub fn tau(&self) -> Option<Complex64> {
        match self.kind {
            WolffKind::Boundary { tau } => Some(tau),
            WolffKind::InteriorFixed { .. } => None,
        }
    }
}

/// Disk coordinate of any point: half-plane points are pulled back by `Ψ⁻¹`.
fn disk_coord(p: &Point) -> Complex64 {
    match p.model() {
        Model::Disk => p.coord(),
        Model::HalfPlane => cayley_inverse_raw(p.coord()),
    }
}

fn disk_endo(m: &MapExpr) -> Result<MapExpr> {
    Ok(simplify(&m.to_disk_endo()?))
}

/// If the disk map is `Ψ⁻¹ ∘ G ∘ Ψ`, returns `G`.
fn half_plane_core(disk: &MapExpr) -> Option<MapExpr> {
    let parts = factors(disk);
    let n = parts.len();
    let is = |m: &MapExpr, inv: bool| match m.node() {
        crate::map::Node::Prim(Primitive::InvCayley) => inv,
        crate::map::Node::Prim(Primitive::Cayley) => !inv,
        _ => false,
    };
    if n >= 3 && is(&parts[0], true) && is(&parts[n - 1], false) {
        MapExpr::chain(parts[1..n - 1].to_vec()).ok()
    } else {
        None
    }
}

struct SeedRun {
    points: Vec<Complex64>,
    /// Stopped before `n` steps because the orbit reached the circle.
    stopped: bool,
}

fn run_disk(f: &MapExpr, z0: Complex64, n: usize) -> SeedRun {
    let mut points = Vec::with_capacity(n + 1);
    points.push(z0);
    let mut z = z0;
    for _ in 0..n {
        match f.eval_raw(z) {
            Ok(v) => {
                z = v;
                points.push(z);
                if 1.0 - z.norm() < DISK_STOP {
                    return SeedRun { points, stopped: true };
                }
            }
            Err(_) => return SeedRun { points, stopped: true },
        }
    }
    SeedRun { points, stopped: false }
}

fn newton_fixed(f: &MapExpr, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..100 {
        let (v, d) = f.eval_with_deriv_raw(z).ok()?;
        let g = v - z;
        if g.norm() == 0.0 {
            return Some(z);
        }
        let dg = d - 1.0;
        if dg.norm() == 0.0 {
            return None;
        }
        let step = g / dg;
        let next = z - step;
        if !(next.re.is_finite() && next.im.is_finite()) || next.norm() >= 1.0 {
            return None;
        }
        z = next;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    let g = f.eval_raw(z).ok()? - z;
    (g.norm() <= 1e-12).then_some(z)
}

fn escapes_in_half_plane(g: &MapExpr, w0: Complex64, n: usize) -> Option<f64> {
    let mut w = w0;
    let mut half = w0;
    for k in 1..=n {
        w = g.eval_raw(w).ok()?;
        if w.norm() > ESCAPE {
            return Some(0.0);
        }
        if k == n / 2 {
            half = w;
        }
    }
    let grows = w.norm() > 1e3 * w0.norm().max(1.0) && w.norm() > 1.2 * half.norm();
    grows.then(|| 2.0 / (w + Complex64::i()).norm())
}

/// Locates the Denjoy–Wolff point of a self-map.
///
/// Half-plane maps are bridged to the disk first. Interior fixed points are
/// refined by Newton's method on `f(z) − z`; boundary points are the common
/// limit of the projected orbits, accelerated by Richardson extrapolation.
pub fn estimate_wolff(m: &MapExpr, opts: &WolffOptions) -> Result<WolffEstimate> {
    if opts.seeds.is_empty() {
        return Err(DynamicsError::InvalidArgument("at least one seed is required".into()));
    }
    if opts.n < 8 {
        return Err(DynamicsError::InvalidArgument("at least 8 iterations are required".into()));
    }
    let f = disk_endo(m)?;
    let seeds: Vec<Complex64> = opts.seeds.iter().map(disk_coord).collect();
    let runs: Vec<SeedRun> = seeds.par_iter().map(|&z| run_disk(&f, z, opts.n)).collect();

    // interior fixed point
    let fixed: Vec<Option<Complex64>> = runs
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(run, &seed)| {
            let last = *run.points.last().expect("orbit holds its seed");
            [last, seed].into_iter().find_map(|start| {
                let p = newton_fixed(&f, start)?;
                let residual = (f.eval_raw(p).ok()? - p).norm();
                (1.0 - p.norm() >= INTERIOR_MARGIN && residual <= opts.tol).then_some(p)
            })
        })
        .collect();
    if let Some(p) = fixed.iter().flatten().next().copied() {
        let (v, multiplier) = f.eval_with_deriv_raw(p)?;
        let spread = fixed.iter().flatten().map(|q| (q - p).norm()).fold(0.0, f64::max);
        return Ok(WolffEstimate {
            kind: WolffKind::InteriorFixed { point: p, multiplier },
            last_step: (v - p).norm(),
            seed_spread: spread,
        });
    }

    // boundary point at infinity of a half-plane map
    if let Some(g) = half_plane_core(&f) {
        let starts: Vec<Complex64> = opts
            .seeds
            .iter()
            .map(|p| match p.model() {
                Model::HalfPlane => p.coord(),
                Model::Disk => cayley_raw(p.coord()),
            })
            .collect();
        let escapes: Vec<Option<f64>> = starts.par_iter().map(|&w| escapes_in_half_plane(&g, w, opts.n)).collect();
        if escapes.iter().all(Option::is_some) {
            return Ok(WolffEstimate {
                kind: WolffKind::Boundary { tau: Complex64::new(1.0, 0.0) },
                last_step: escapes.iter().flatten().fold(0.0, |a, &b| a.max(b)),
                seed_spread: 0.0,
            });
        }
    }

    // boundary point from projected disk orbits
    let mut taus = Vec::with_capacity(runs.len());
    let mut last_step: f64 = 0.0;
    for run in &runs {
        let pts = &run.points;
        let last = *pts.last().expect("orbit holds its seed");
        if 1.0 - last.norm() >= BOUNDARY_REACH {
            return Err(DynamicsError::Undecided(format!(
                "no interior fixed point found and an orbit stays at 1-|z| = {:.3e} after {} steps",
                1.0 - last.norm(),
                pts.len() - 1
            )));
        }
        let proj = |z: Complex64| z / z.norm();
        let k = floor4(pts.len() - 1);
        let (tau, prev) = if run.stopped || k < 8 {
            (proj(last), proj(pts[pts.len().saturating_sub(2)]))
        } else {
            (proj(richardson_at(pts, k)), proj(richardson_at(pts, k - 4)))
        };
        last_step = last_step.max((tau - prev).norm());
        taus.push(tau);
    }
    let spread = taus.iter().map(|t| (t - taus[0]).norm()).fold(0.0, f64::max);
    if last_step >= opts.tol || spread >= 10.0 * opts.tol {
        return Err(DynamicsError::Undecided(format!(
            "boundary projections not settled: last change {last_step:.3e}, seed spread {spread:.3e}"
        )));
    }
    Ok(WolffEstimate {
        kind: WolffKind::Boundary { tau: taus[0] },
        last_step,
        seed_spread: spread,
    })
}

/// `Ψ ∘ f₁ ∘ Ψ⁻¹` with `f₁(z) = τ̄ f(τz)`; its Wolff point is `∞` when `τ` is that of `m`.
pub fn conjugate_to_halfplane(m: &MapExpr, tau: Complex64) -> Result<MapExpr> {
    if (tau.norm() - 1.0).abs() > 1e-12 {
        return Err(DynamicsError::NotUnimodular(tau.norm()));
    }
    let alpha = tau.arg();
    let chain = MapExpr::chain(vec![
        MapExpr::prim(Primitive::Cayley)?,
        MapExpr::prim(Primitive::Rot { theta: -alpha })?,
        m.to_disk_endo()?,
        MapExpr::prim(Primitive::Rot { theta: alpha })?,
        MapExpr::prim(Primitive::InvCayley)?,
    ])?;
    Ok(simplify(&chain))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameKind {
    /// Interior fixed point: iterate in the disk.
    Disk,
    /// Boundary Wolff point `tau`: iterate the half-plane conjugate.
    HalfPlane { tau: Complex64 },
}

/// A self-map together with the coordinates its dynamics are computed in.
#[derive(Clone, Debug)]
pub struct Frame {
    source: MapExpr,
    disk: MapExpr,
    wolff: WolffEstimate,
    kind: FrameKind,
    working: MapExpr,
}

impl Frame {
    pub fn new(m: &MapExpr) -> Result<Self> {
        Self::with_options(m, &WolffOptions::default())
    }

    pub fn with_options(m: &MapExpr, opts: &WolffOptions) -> Result<Self> {
        let wolff = estimate_wolff(m, opts)?;
        let disk = disk_endo(m)?;
        let (kind, working) = match wolff.kind {
            WolffKind::InteriorFixed { .. } => (FrameKind::Disk, disk.clone()),
            WolffKind::Boundary { tau } => (FrameKind::HalfPlane { tau }, conjugate_to_halfplane(m, tau)?),
        };
        Ok(Self {
            source: m.clone(),
            disk,
            wolff,
            kind,
            working,
        })
    }

    pub fn source(&self) -> &MapExpr {
        &self.source
    }

    pub fn disk_map(&self) -> &MapExpr {
        &self.disk
    }

    pub fn working(&self) -> &MapExpr {
        &self.working
    }

    pub fn wolff(&self) -> &WolffEstimate {
        &self.wolff
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn tau(&self) -> Option<Complex64> {
        match self.kind {
            FrameKind::HalfPlane { tau } => Some(tau),
            FrameKind::Disk => None,
        }
    }

    pub fn model(&self) -> Model {
        self.working.domain()
    }

    /// Working coordinate of a point; half-plane points denote `Ψ⁻¹` of themselves.
    pub fn to_working(&self, p: &Point) -> Result<Complex64> {
        let w = match self.kind {
            FrameKind::Disk => disk_coord(p),
            FrameKind::HalfPlane { tau } => {
                if tau == Complex64::new(1.0, 0.0) && p.model() == Model::HalfPlane {
                    p.coord()
                } else {
                    cayley_raw(tau.conj() * disk_coord(p))
                }
            }
        };
        Point::new(w, self.model())?;
        Ok(w)
    }

    /// Disk coordinate of a working coordinate.
    pub fn to_disk(&self, w: Complex64) -> Complex64 {
        match self.kind {
            FrameKind::Disk => w,
            FrameKind::HalfPlane { tau } => tau * cayley_inverse_raw(w),
        }
    }
}
