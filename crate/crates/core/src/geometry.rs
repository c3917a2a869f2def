//! Poincaré metric, Möbius automorphisms of the disk and of the upper
//! half-plane, and the Cayley transform between the two models.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which model of the hyperbolic plane a coordinate lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Disk,
    HalfPlane,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Disk => f.write_str("Disk"),
            Model::HalfPlane => f.write_str("HalfPlane"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{re}{im:+}i is not an interior point of the {model} model")]
    OutsideDomain { model: Model, re: f64, im: f64 },
    #[error("model mismatch: expected {expected}, found {found}")]
    ModelMismatch { expected: Model, found: Model },
    #[error("invalid automorphism parameters: {0}")]
    InvalidAutomorphism(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no disk automorphism fits the points (residual {residual:e})")]
    NoFit { residual: f64 },
}

/// A validated interior point of one of the two models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coord: Complex64,
    model: Model,
}

impl Point {
    pub fn new(coord: Complex64, model: Model) -> Result<Self, GeometryError> {
        if is_interior(coord, model) {
            Ok(Self { coord, model })
        } else {
            Err(GeometryError::OutsideDomain {
                model,
                re: coord.re,
                im: coord.im,
            })
        }
    }

    pub fn disk(z: Complex64) -> Result<Self, GeometryError> {
        Self::new(z, Model::Disk)
    }

    pub fn half_plane(w: Complex64) -> Result<Self, GeometryError> {
        Self::new(w, Model::HalfPlane)
    }

    /// The origin of the disk or `i` in the half-plane.
    pub fn center(model: Model) -> Self {
        let coord = match model {
            Model::Disk => Complex64::new(0.0, 0.0),
            Model::HalfPlane => I,
        };
        Self { coord, model }
    }

    pub fn coord(&self) -> Complex64 {
        self.coord
    }

    pub fn model(&self) -> Model {
        self.model
    }

    fn expect_model(&self, model: Model) -> Result<(), GeometryError> {
        if self.model == model {
            Ok(())
        } else {
            Err(GeometryError::ModelMismatch {
                expected: model,
                found: self.model,
            })
        }
    }
}

/// Interior test for a raw coordinate.
pub fn is_interior(coord: Complex64, model: Model) -> bool {
    if !(coord.re.is_finite() && coord.im.is_finite()) {
        return false;
    }
    match model {
        Model::Disk => coord.norm() < 1.0,
        Model::HalfPlane => coord.im > 0.0,
    }
}

/// Poincaré distance in the `tanh⁻¹` normalization.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HyperbolicDistance(f64);

impl HyperbolicDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for HyperbolicDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `tanh⁻¹ t` given `t` and an independently computed `1 − t²`.
///
/// Small `t` goes through `log1p`; large `t` uses the supplied `1 − t²`,
/// which the callers compute without subtracting nearly equal numbers.
fn atanh_split(t: f64, one_minus_t2: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t < 0.5 {
        0.5 * (2.0 * t / (1.0 - t)).ln_1p()
    } else {
        let one_plus = 1.0 + t;
        0.5 * (one_plus * one_plus / one_minus_t2).ln()
    }
}

/// `1 − |z|²` without forming `|z|²` near the circle.
fn one_minus_abs2(z: Complex64) -> f64 {
    let r = z.norm();
    (1.0 - r) * (1.0 + r)
}

pub(crate) fn disk_distance_raw(z1: Complex64, z2: Complex64) -> f64 {
    let num = (z2 - z1).norm();
    let den = (Complex64::new(1.0, 0.0) - z1.conj() * z2).norm();
    if num == 0.0 {
        return 0.0;
    }
    let t = num / den;
    let one_minus_t2 = one_minus_abs2(z1) * one_minus_abs2(z2) / (den * den);
    atanh_split(t, one_minus_t2)
}

pub(crate) fn half_plane_distance_raw(w1: Complex64, w2: Complex64) -> f64 {
    let num = (w2 - w1).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = Complex64::new(w2.re - w1.re, w2.im + w1.im).norm();
    let t = num / den;
    let one_minus_t2 = 4.0 * (w1.im / den) * (w2.im / den);
    atanh_split(t, one_minus_t2)
}

pub(crate) fn distance_raw(model: Model, a: Complex64, b: Complex64) -> f64 {
    match model {
        Model::Disk => disk_distance_raw(a, b),
        Model::HalfPlane => half_plane_distance_raw(a, b),
    }
}

pub fn poincare_disk(z1: &Point, z2: &Point) -> Result<HyperbolicDistance, GeometryError> {
    z1.expect_model(Model::Disk)?;
    z2.expect_model(Model::Disk)?;
    Ok(HyperbolicDistance(disk_distance_raw(z1.coord, z2.coord)))
}

pub fn poincare_halfplane(w1: &Point, w2: &Point) -> Result<HyperbolicDistance, GeometryError> {
    w1.expect_model(Model::HalfPlane)?;
    w2.expect_model(Model::HalfPlane)?;
    Ok(HyperbolicDistance(half_plane_distance_raw(w1.coord, w2.coord)))
}

/// Distance in whichever model the two points share.
pub fn distance(p: &Point, q: &Point) -> Result<HyperbolicDistance, GeometryError> {
    q.expect_model(p.model)?;
    Ok(HyperbolicDistance(distance_raw(p.model, p.coord, q.coord)))
}

/// Reciprocal with Smith scaling, so that huge arguments do not overflow.
pub(crate) fn recip(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a.abs() >= b.abs() {
        let r = b / a;
        let d = a + b * r;
        Complex64::new(1.0 / d, -r / d)
    } else {
        let r = a / b;
        let d = a * r + b;
        Complex64::new(r / d, -1.0 / d)
    }
}

/// `Ψ(z) = i(1+z)/(1−z)`, with the imaginary part written as `(1−|z|²)/|1−z|²`.
pub(crate) fn cayley_raw(z: Complex64) -> Complex64 {
    let one_minus = Complex64::new(1.0 - z.re, -z.im);
    let d = one_minus.norm_sqr();
    Complex64::new(-2.0 * z.im / d, one_minus_abs2(z) / d)
}

/// `Ψ⁻¹(w) = (w−i)/(w+i) = 1 − 2i/(w+i)`.
pub(crate) fn cayley_inverse_raw(w: Complex64) -> Complex64 {
    let q = recip(w + I);
    if w.norm() <= 4.0 {
        // near i the subtraction form keeps the small result accurate
        (w - I) * q
    } else {
        Complex64::new(1.0, 0.0) - Complex64::new(0.0, 2.0) * q
    }
}

pub fn cayley(z: &Point) -> Result<Point, GeometryError> {
    z.expect_model(Model::Disk)?;
    Point::half_plane(cayley_raw(z.coord))
}

pub fn cayley_inverse(w: &Point) -> Result<Point, GeometryError> {
    w.expect_model(Model::HalfPlane)?;
    Point::disk(cayley_inverse_raw(w.coord))
}

/// An automorphism of the disk or of the upper half-plane.
///
/// Disk form: `z ↦ e^{iθ}(z+a)/(1+āz)`; half-plane form:
/// `w ↦ (αw+β)/(γw+δ)` with real coefficients and `αδ−βγ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MobiusAut {
    Disk {
        theta: f64,
        a: Complex64,
    },
    HalfPlane {
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    },
}

impl MobiusAut {
    pub fn disk(theta: f64, a: Complex64) -> Result<Self, GeometryError> {
        if !(theta.is_finite() && a.re.is_finite() && a.im.is_finite()) {
            return Err(GeometryError::InvalidAutomorphism(
                "non-finite parameter".into(),
            ));
        }
        if a.norm() >= 1.0 {
            return Err(GeometryError::InvalidAutomorphism(format!(
                "|a| = {} must be < 1",
                a.norm()
            )));
        }
        Ok(MobiusAut::Disk { theta, a })
    }

    /// Builds a half-plane automorphism, rescaling to unit determinant.
    pub fn half_plane(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, GeometryError> {
        let det = alpha * delta - beta * gamma;
        if !(det.is_finite() && det > 0.0) {
            return Err(GeometryError::InvalidAutomorphism(format!(
                "determinant {det} must be positive"
            )));
        }
        let s = det.sqrt();
        Ok(MobiusAut::HalfPlane {
            alpha: alpha / s,
            beta: beta / s,
            gamma: gamma / s,
            delta: delta / s,
        })
    }

    pub fn identity(model: Model) -> Self {
        match model {
            Model::Disk => MobiusAut::Disk {
                theta: 0.0,
                a: Complex64::new(0.0, 0.0),
            },
            Model::HalfPlane => MobiusAut::HalfPlane {
                alpha: 1.0,
                beta: 0.0,
                gamma: 0.0,
                delta: 1.0,
            },
        }
    }

    pub fn rotation(theta: f64) -> Self {
        MobiusAut::Disk {
            theta,
            a: Complex64::new(0.0, 0.0),
        }
    }

    pub fn model(&self) -> Model {
        match self {
            MobiusAut::Disk { .. } => Model::Disk,
            MobiusAut::HalfPlane { .. } => Model::HalfPlane,
        }
    }

    pub(crate) fn apply_raw(&self, z: Complex64) -> Complex64 {
        match *self {
            MobiusAut::Disk { theta, a } => {
                Complex64::from_polar(1.0, theta) * (z + a) / (Complex64::new(1.0, 0.0) + a.conj() * z)
            }
            MobiusAut::HalfPlane {
                alpha,
                beta,
                gamma,
                delta,
            } => (z * alpha + beta) / (z * gamma + delta),
        }
    }

    pub fn apply(&self, p: &Point) -> Result<Point, GeometryError> {
        p.expect_model(self.model())?;
        Point::new(self.apply_raw(p.coord), p.model)
    }

    pub fn inverse(&self) -> Self {
        match *self {
            MobiusAut::Disk { theta, a } => MobiusAut::Disk {
                theta: -theta,
                a: -(Complex64::from_polar(1.0, theta) * a),
            },
            MobiusAut::HalfPlane {
                alpha,
                beta,
                gamma,
                delta,
            } => MobiusAut::HalfPlane {
                alpha: delta,
                beta: -beta,
                gamma: -gamma,
                delta: alpha,
            },
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusAut) -> Result<Self, GeometryError> {
        match (*self, *other) {
            (MobiusAut::Disk { theta: t1, a: a1 }, MobiusAut::Disk { theta: t2, a: a2 }) => {
                let e1 = Complex64::from_polar(1.0, t1);
                let e2 = Complex64::from_polar(1.0, t2);
                let one = Complex64::new(1.0, 0.0);
                // [[e1, e1 a1], [ā1, 1]] · [[e2, e2 a2], [ā2, 1]]
                let p = e1 * e2 + e1 * a1 * a2.conj();
                let r = a1.conj() * e2 + a2.conj();
                let s = a1.conj() * e2 * a2 + one;
                let u = p / s;
                let theta = u.arg();
                let a = (r / s).conj();
                MobiusAut::disk(theta, a)
            }
            (
                MobiusAut::HalfPlane {
                    alpha: a1,
                    beta: b1,
                    gamma: c1,
                    delta: d1,
                },
                MobiusAut::HalfPlane {
                    alpha: a2,
                    beta: b2,
                    gamma: c2,
                    delta: d2,
                },
            ) => MobiusAut::half_plane(
                a1 * a2 + b1 * c2,
                a1 * b2 + b1 * d2,
                c1 * a2 + d1 * c2,
                c1 * b2 + d1 * d2,
            ),
            (g, h) => Err(GeometryError::ModelMismatch {
                expected: g.model(),
                found: h.model(),
            }),
        }
    }
}

pub fn aut_apply(g: &MobiusAut, p: &Point) -> Result<Point, GeometryError> {
    g.apply(p)
}

pub fn aut_inverse(g: &MobiusAut) -> MobiusAut {
    g.inverse()
}

pub fn aut_compose(g: &MobiusAut, h: &MobiusAut) -> Result<MobiusAut, GeometryError> {
    g.compose(h)
}

/// The canonical automorphism sending the model's center (0 or `i`) to `target`.
pub fn aut_sending_center_to(target: &Point) -> MobiusAut {
    let t = target.coord;
    match target.model {
        Model::Disk => MobiusAut::Disk { theta: 0.0, a: t },
        Model::HalfPlane => {
            let s = t.im.sqrt();
            MobiusAut::HalfPlane {
                alpha: s,
                beta: t.re / s,
                gamma: 0.0,
                delta: 1.0 / s,
            }
        }
    }
}

/// Fits the disk automorphism sending `src[k]` to `dst[k]`.
///
/// The candidate is pinned by the first point and the direction of the
/// second; the fit is accepted when every pair lands within hyperbolic
/// distance `tol`.
pub fn disk_aut_through_three_points(
    src: &[Point; 3],
    dst: &[Point; 3],
    tol: f64,
) -> Result<MobiusAut, GeometryError> {
    for p in src.iter().chain(dst.iter()) {
        p.expect_model(Model::Disk)?;
    }
    for (name, pts) in [("source", src), ("target", dst)] {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if disk_distance_raw(pts[i].coord, pts[j].coord) < 1e-14 {
                    return Err(GeometryError::Degenerate(format!(
                        "{name} points {i} and {j} coincide"
                    )));
                }
            }
        }
    }
    let from_src = aut_sending_center_to(&src[0]);
    let from_dst = aut_sending_center_to(&dst[0]);
    let u = from_src.inverse().apply_raw(src[1].coord);
    let v = from_dst.inverse().apply_raw(dst[1].coord);
    let rot = MobiusAut::rotation(v.arg() - u.arg());
    let fit = from_dst.compose(&rot)?.compose(&from_src.inverse())?;
    let residual = src
        .iter()
        .zip(dst.iter())
        .map(|(s, d)| disk_distance_raw(fit.apply_raw(s.coord), d.coord))
        .fold(0.0, f64::max);
    if residual <= tol {
        Ok(fit)
    } else {
        Err(GeometryError::NoFit { residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> Point {
        Point::disk(c(re, im)).unwrap()
    }

    fn hp(re: f64, im: f64) -> Point {
        Point::half_plane(c(re, im)).unwrap()
    }

    #[test]
    fn disk_distance_examples() {
        assert_eq!(poincare_disk(&dp(0.0, 0.0), &dp(0.0, 0.0)).unwrap().value(), 0.0);
        let d = poincare_disk(&dp(0.0, 0.0), &dp(0.5, 0.0)).unwrap().value();
        // ½ ln 3
        assert!((d - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((d - 0.549_306_144_3).abs() < 1e-10);
    }

    #[test]
    fn half_plane_distance_examples() {
        assert_eq!(poincare_halfplane(&hp(0.0, 1.0), &hp(0.0, 1.0)).unwrap().value(), 0.0);
        let d = poincare_halfplane(&hp(0.0, 1.0), &hp(0.0, 2.0)).unwrap().value();
        assert!((d - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((d - 0.346_573_590_3).abs() < 1e-10);
    }

    #[test]
    fn distance_rejects_wrong_model() {
        let err = poincare_disk(&hp(0.0, 1.0), &dp(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, GeometryError::ModelMismatch { .. }));
        assert!(Point::disk(c(1.0, 0.0)).is_err());
        assert!(Point::disk(c(0.6, 0.8)).is_err());
        assert!(Point::half_plane(c(3.0, 0.0)).is_err());
        assert!(Point::half_plane(c(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn distance_near_boundary_keeps_precision() {
        // 1 − r = 1e-12: ω(0, r) = ½ ln((1+r)/(1−r))
        let r: f64 = 1.0 - 1e-12;
        let exact = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
        let d = poincare_disk(&dp(0.0, 0.0), &dp(r, 0.0)).unwrap().value();
        assert!((d - exact).abs() < 1e-9 * exact);
        // tiny separations
        let d = poincare_halfplane(&hp(0.0, 1.0), &hp(1e-9, 1.0)).unwrap().value();
        assert!((d - 0.5e-9).abs() < 1e-22);
    }

    #[test]
    fn cayley_examples() {
        assert_eq!(cayley(&dp(0.0, 0.0)).unwrap().coord(), c(0.0, 1.0));
        let w = cayley(&dp(0.5, 0.0)).unwrap().coord();
        assert!((w - c(0.0, 3.0)).norm() < 1e-15);
        assert!(cayley_inverse(&hp(0.0, 1.0)).unwrap().coord().norm() < 1e-16);
        let z = cayley_inverse(&hp(1.0, 1.0)).unwrap().coord();
        assert!((z - c(0.2, -0.4)).norm() < 1e-15);
        assert!(cayley(&hp(0.0, 1.0)).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let id = MobiusAut::identity(Model::Disk);
        assert_eq!(id.apply(&dp(0.3, -0.2)).unwrap().coord(), c(0.3, -0.2));
        let g = MobiusAut::disk(0.0, c(0.3, 0.0)).unwrap();
        assert!((g.apply(&dp(0.0, 0.0)).unwrap().coord() - c(0.3, 0.0)).norm() < 1e-16);
        let s = std::f64::consts::SQRT_2;
        let h = MobiusAut::half_plane(s, 0.0, 0.0, 1.0 / s).unwrap();
        assert!((h.apply(&hp(0.0, 1.0)).unwrap().coord() - c(0.0, 2.0)).norm() < 1e-15);
        assert!(MobiusAut::disk(0.0, c(1.0, 0.0)).is_err());
        assert!(MobiusAut::half_plane(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(g.apply(&hp(0.0, 1.0)).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(MobiusAut::identity(Model::Disk).inverse(), MobiusAut::Disk {
            theta: -0.0,
            a: -c(0.0, 0.0)
        });
        let g = MobiusAut::disk(0.0, c(0.4, 0.1)).unwrap();
        let back = g.inverse().apply(&dp(0.4, 0.1)).unwrap().coord();
        assert!(back.norm() < 1e-16);
        let h = MobiusAut::half_plane(2.0, 1.0, 0.5, 0.75).unwrap();
        match h.inverse() {
            MobiusAut::HalfPlane { alpha, beta, gamma, delta } => match h {
                MobiusAut::HalfPlane { alpha: a, beta: b, gamma: g, delta: d } => {
                    assert_eq!((alpha, beta, gamma, delta), (d, -b, -g, a));
                }
                _ => unreachable!(),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn rotations_compose_additively() {
        let g = MobiusAut::rotation(0.4).compose(&MobiusAut::rotation(1.1)).unwrap();
        let z = dp(0.3, 0.2);
        let expected = Complex64::from_polar(1.0, 1.5) * z.coord();
        assert!((g.apply(&z).unwrap().coord() - expected).norm() < 1e-15);
        assert!(MobiusAut::rotation(0.4)
            .compose(&MobiusAut::identity(Model::HalfPlane))
            .is_err());
    }

    #[test]
    fn center_maps_to_target() {
        let g = aut_sending_center_to(&dp(0.0, 0.0));
        assert_eq!(g.apply(&dp(0.2, 0.1)).unwrap().coord(), c(0.2, 0.1));
        let g = aut_sending_center_to(&dp(0.5, 0.0));
        assert_eq!(g.apply(&Point::center(Model::Disk)).unwrap().coord(), c(0.5, 0.0));
        let h = aut_sending_center_to(&hp(3.0, 2.0));
        let img = h.apply(&Point::center(Model::HalfPlane)).unwrap().coord();
        assert!((img - c(3.0, 2.0)).norm() < 1e-15);
        // w ↦ 2w + 3
        let img = h.apply(&hp(1.0, 1.0)).unwrap().coord();
        assert!((img - c(5.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn three_point_fit() {
        let src = [dp(0.0, 0.0), dp(0.5, 0.0), dp(0.0, -0.5)];
        let id = disk_aut_through_three_points(&src, &src, 1e-12).unwrap();
        for p in &src {
            assert!((id.apply(p).unwrap().coord() - p.coord()).norm() < 1e-15);
        }

        let rot = MobiusAut::rotation(std::f64::consts::FRAC_PI_3);
        let src = [dp(0.0, 0.0), dp(0.5, 0.0), dp(-0.5, 0.0)];
        let dst = src.map(|p| rot.apply(&p).unwrap());
        let fit = disk_aut_through_three_points(&src, &dst, 1e-12).unwrap();
        for z in [dp(0.1, 0.7), dp(-0.3, -0.3)] {
            let want = rot.apply(&z).unwrap().coord();
            assert!((fit.apply(&z).unwrap().coord() - want).norm() < 1e-12);
        }

        let sq = src.map(|p| Point::disk(p.coord() * p.coord() + c(0.0, 0.1)).unwrap());
        let sq = [sq[0], sq[1], dp(0.2, 0.3)];
        assert!(matches!(
            disk_aut_through_three_points(&src, &sq, 1e-9),
            Err(GeometryError::NoFit { .. })
        ));

        let dup = [dp(0.1, 0.0), dp(0.1, 0.0), dp(0.3, 0.0)];
        assert!(matches!(
            disk_aut_through_three_points(&dup, &src, 1e-9),
            Err(GeometryError::Degenerate(_))
        ));
    }
}
