use num_complex::Complex64;
use thiserror::Error;

use super::{MapExpr, Node, Primitive};
use crate::geometry::{cayley_inverse_raw, cayley_raw, is_interior, recip, Model, Point};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Half-plane coordinates beyond this modulus are treated as overflow.
pub const OVERFLOW_GUARD: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point lives in {found} but the map expects {expected}")]
    DomainMismatch { expected: Model, found: Model },
    #[error("non-finite value produced by '{path}'")]
    NonFinite { path: String },
    #[error("'{path}' produced a point on the boundary of the {model} model")]
    BoundaryCollapse { path: String, model: Model },
    #[error("half-plane coordinate exceeded {OVERFLOW_GUARD:e} after {steps} steps")]
    Overflow { steps: usize },
    #[error("iteration requires a self-map")]
    NotEndo,
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl Primitive {
    /// Value and derivative at `z`; the derivative is only formed when asked.
    fn apply(&self, z: Complex64, want_deriv: bool) -> (Complex64, Complex64) {
        match self {
            Primitive::Cayley => {
                let d = if want_deriv {
                    let u = ONE - z;
                    Complex64::new(0.0, 2.0) / (u * u)
                } else {
                    ONE
                };
                (cayley_raw(z), d)
            }
            Primitive::InvCayley => {
                let d = if want_deriv {
                    let r = recip(z + I);
                    Complex64::new(0.0, 2.0) * r * r
                } else {
                    ONE
                };
                (cayley_inverse_raw(z), d)
            }
            Primitive::Rot { theta } => {
                let e = cis(*theta);
                (e * z, e)
            }
            Primitive::DiskAut { theta, a } => {
                let e = cis(*theta);
                let den = ONE + a.conj() * z;
                let v = e * (z + a) / den;
                let d = if want_deriv {
                    e * (1.0 - a.norm_sqr()) / (den * den)
                } else {
                    ONE
                };
                (v, d)
            }
            Primitive::HShift { b } => (z + b, ONE),
            Primitive::HScale { a } => (z * *a, Complex64::new(*a, 0.0)),
            Primitive::HNudge { c } => {
                let r = recip(z + I);
                (z + c - r, ONE + r * r)
            }
            Primitive::HMobius { a, b, c, d } => {
                let den = z * *c + *d;
                let v = (z * *a + *b) / den;
                let dv = if want_deriv {
                    Complex64::new(a * d - b * c, 0.0) / (den * den)
                } else {
                    ONE
                };
                (v, dv)
            }
            Primitive::Blaschke { theta, factors } => {
                let e = cis(*theta);
                // b_k^{m_k} and its derivative for each factor
                let parts: Vec<(Complex64, Complex64)> = factors
                    .iter()
                    .map(|f| {
                        let den = ONE - f.zero.conj() * z;
                        let b = (z - f.zero) / den;
                        let m = f.multiplicity as i32;
                        let bm = b.powi(m);
                        let dbm = if want_deriv {
                            let db = (1.0 - f.zero.norm_sqr()) / (den * den);
                            b.powi(m - 1) * db * m as f64
                        } else {
                            ONE
                        };
                        (bm, dbm)
                    })
                    .collect();
                let value = parts.iter().fold(e, |acc, (bm, _)| acc * bm);
                let deriv = if want_deriv {
                    let mut total = Complex64::new(0.0, 0.0);
                    for k in 0..parts.len() {
                        let mut term = e * parts[k].1;
                        for (j, (bm, _)) in parts.iter().enumerate() {
                            if j != k {
                                term *= bm;
                            }
                        }
                        total += term;
                    }
                    total
                } else {
                    ONE
                };
                (value, deriv)
            }
        }
    }
}

impl MapExpr {
    fn walk(&self, z: Complex64, want_deriv: bool) -> Result<(Complex64, Complex64), EvalError> {
        match &self.node {
            Node::Prim(p) => {
                let (v, d) = p.apply(z, want_deriv);
                if !(v.re.is_finite() && v.im.is_finite()) || (want_deriv && !(d.re.is_finite() && d.im.is_finite())) {
                    return Err(EvalError::NonFinite { path: p.to_string() });
                }
                if !is_interior(v, self.codomain) {
                    return Err(EvalError::BoundaryCollapse {
                        path: p.to_string(),
                        model: self.codomain,
                    });
                }
                Ok((v, d))
            }
            Node::Compose(outer, inner) => {
                let (u, du) = inner.walk(z, want_deriv)?;
                let (v, dv) = outer.walk(u, want_deriv)?;
                Ok((v, dv * du))
            }
            Node::Iterate(base, n) => {
                let mut v = z;
                let mut d = ONE;
                for _ in 0..*n {
                    let (nv, nd) = base.walk(v, want_deriv)?;
                    v = nv;
                    d *= nd;
                }
                Ok((v, d))
            }
        }
    }

    /// Evaluates on a raw coordinate assumed to lie in the domain.
    pub(crate) fn eval_raw(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.walk(z, false).map(|(v, _)| v)
    }

    pub(crate) fn eval_with_deriv_raw(&self, z: Complex64) -> Result<(Complex64, Complex64), EvalError> {
        self.walk(z, true)
    }

    fn check_domain(&self, p: &Point) -> Result<(), EvalError> {
        if p.model() != self.domain {
            Err(EvalError::DomainMismatch {
                expected: self.domain,
                found: p.model(),
            })
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, p: &Point) -> Result<Point, EvalError> {
        self.check_domain(p)?;
        let v = self.eval_raw(p.coord())?;
        Point::new(v, self.codomain).map_err(|_| EvalError::BoundaryCollapse {
            path: self.to_string(),
            model: self.codomain,
        })
    }

    /// Complex derivative at `p` by the chain rule over symbolic primitive derivatives.
    pub fn deriv(&self, p: &Point) -> Result<Complex64, EvalError> {
        self.check_domain(p)?;
        self.eval_with_deriv_raw(p.coord()).map(|(_, d)| d)
    }

    /// `n`-fold application; `n = 0` returns `p`.
    pub fn iterate_eval(&self, p: &Point, n: usize) -> Result<Point, EvalError> {
        if !self.is_endo() {
            return Err(EvalError::NotEndo);
        }
        self.check_domain(p)?;
        let mut z = p.coord();
        for step in 0..n {
            z = self.eval_raw(z)?;
            if self.domain == Model::HalfPlane && z.norm() > OVERFLOW_GUARD {
                return Err(EvalError::Overflow { steps: step + 1 });
            }
        }
        Point::new(z, self.domain).map_err(|_| EvalError::BoundaryCollapse {
            path: self.to_string(),
            model: self.domain,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let m = parse_map("hshift(1)").unwrap();
        let w = m.eval(&Point::half_plane(I).unwrap()).unwrap();
        assert_eq!(w.coord(), c(1.0, 1.0));

        let id = parse_map("blaschke(0;(0,1))").unwrap();
        for z in [c(0.3, 0.1), c(-0.7, 0.2), c(0.0, -0.9)] {
            let v = id.eval(&Point::disk(z).unwrap()).unwrap().coord();
            assert!((v - z).norm() < 1e-16);
        }

        let m = parse_map("invcayley . hshift(1) . cayley").unwrap();
        let v = m.eval(&Point::disk(c(0.0, 0.0)).unwrap()).unwrap().coord();
        assert!((v - c(0.2, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_model() {
        let m = parse_map("hshift(1)").unwrap();
        let err = m.eval(&Point::disk(c(0.0, 0.0)).unwrap()).unwrap_err();
        assert!(matches!(err, EvalError::DomainMismatch { .. }));
    }

    #[test]
    fn derivative_examples() {
        let w = Point::half_plane(c(0.3, 2.0)).unwrap();
        assert_eq!(parse_map("hshift(1+1i)").unwrap().deriv(&w).unwrap(), ONE);
        assert_eq!(parse_map("hscale(2)").unwrap().deriv(&w).unwrap(), c(2.0, 0.0));
        let sq = parse_map("blaschke(0;(0,2))").unwrap();
        let z = Point::disk(c(0.3, -0.2)).unwrap();
        assert!((sq.deriv(&z).unwrap() - z.coord() * 2.0).norm() < 1e-15);
        assert_eq!(sq.deriv(&Point::disk(c(0.0, 0.0)).unwrap()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn iterate_examples() {
        let m = parse_map("hshift(1)").unwrap();
        let w = m.iterate_eval(&Point::half_plane(I).unwrap(), 3).unwrap();
        assert_eq!(w.coord(), c(3.0, 1.0));
        let p = Point::disk(c(0.5, 0.0)).unwrap();
        let sq = parse_map("blaschke(0;(0,2))").unwrap();
        assert_eq!(sq.iterate_eval(&p, 0).unwrap(), p);
        let v = sq.iterate_eval(&p, 4).unwrap().coord();
        assert!((v.re - 0.5f64.powi(16)).abs() < 1e-20);
        assert!((v.re - 1.526e-5).abs() < 1e-8);
    }

    #[test]
    fn overflow_is_guarded() {
        let m = parse_map("hscale(1e76)").unwrap();
        let err = m.iterate_eval(&Point::half_plane(I).unwrap(), 10).unwrap_err();
        assert_eq!(err, EvalError::Overflow { steps: 4 });
        let m = parse_map("hscale(1e200)").unwrap();
        let err = m.iterate_eval(&Point::half_plane(I).unwrap(), 10).unwrap_err();
        assert!(matches!(err, EvalError::NonFinite { .. }));
    }
}
