//! A small typed expression language for holomorphic self-maps.
//!
//! Expressions are built from constraint-checked primitives with
//! composition (`f . g` is `f∘g`, `g` applied first) and iteration
//! (`f^n`). Every node knows its domain and codomain model.

mod eval;
mod parse;
mod simplify;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Model;

pub use eval::EvalError;
pub use parse::{parse_map, ParseError, ParseErrorKind};
pub(crate) use parse::parse_complex_literal;
pub use simplify::simplify;
pub(crate) use simplify::factors;

/// One zero of a Blaschke product together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlaschkeFactor {
    pub zero: Complex64,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    /// `z ↦ i(1+z)/(1−z)`, Disk → HalfPlane.
    Cayley,
    /// `w ↦ (w−i)/(w+i)`, HalfPlane → Disk.
    InvCayley,
    /// `z ↦ e^{iθ}z`.
    Rot { theta: f64 },
    /// `z ↦ e^{iθ}(z+a)/(1+āz)`, `|a| < 1`.
    DiskAut { theta: f64, a: Complex64 },
    /// `w ↦ w+b`, `Im b ≥ 0`, `b ≠ 0`.
    HShift { b: Complex64 },
    /// `w ↦ aw`, `a > 0`.
    HScale { a: f64 },
    /// `w ↦ w + c − 1/(w+i)`, `Im c ≥ 0`.
    HNudge { c: Complex64 },
    /// `w ↦ (aw+b)/(cw+d)` with real coefficients and `ad − bc > 0`.
    HMobius { a: f64, b: f64, c: f64, d: f64 },
    /// `z ↦ e^{iθ} ∏ ((z−a_k)/(1−ā_k z))^{m_k}`.
    Blaschke {
        theta: f64,
        factors: Vec<BlaschkeFactor>,
    },
}

impl Primitive {
    pub fn domain(&self) -> Model {
        match self {
            Primitive::Cayley
            | Primitive::Rot { .. }
            | Primitive::DiskAut { .. }
            | Primitive::Blaschke { .. } => Model::Disk,
            _ => Model::HalfPlane,
        }
    }

    pub fn codomain(&self) -> Model {
        match self {
            Primitive::InvCayley
            | Primitive::Rot { .. }
            | Primitive::DiskAut { .. }
            | Primitive::Blaschke { .. } => Model::Disk,
            _ => Model::HalfPlane,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Cayley => "cayley",
            Primitive::InvCayley => "invcayley",
            Primitive::Rot { .. } => "rot",
            Primitive::DiskAut { .. } => "diskaut",
            Primitive::HShift { .. } => "hshift",
            Primitive::HScale { .. } => "hscale",
            Primitive::HNudge { .. } => "hnudge",
            Primitive::HMobius { .. } => "hmob",
            Primitive::Blaschke { .. } => "blaschke",
        }
    }

    /// Checks the parameter constraint that makes the primitive a map
    /// into its codomain.
    pub fn validate(&self) -> Result<(), MapError> {
        let finite = |x: f64| x.is_finite();
        let cfinite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        let violation = |msg: String| Err(MapError::Constraint(msg));
        match self {
            Primitive::Cayley | Primitive::InvCayley => Ok(()),
            Primitive::Rot { theta } => {
                if finite(*theta) {
                    Ok(())
                } else {
                    violation("rot: angle must be finite".into())
                }
            }
            Primitive::DiskAut { theta, a } => {
                if !finite(*theta) || !cfinite(*a) {
                    violation("diskaut: parameters must be finite".into())
                } else if a.norm() >= 1.0 {
                    violation(format!("diskaut: |a| < 1 required, got |a| = {}", a.norm()))
                } else {
                    Ok(())
                }
            }
            Primitive::HShift { b } => {
                if !cfinite(*b) {
                    violation("hshift: b must be finite".into())
                } else if b.im < 0.0 {
                    violation(format!("hshift: Im b >= 0 required, got Im b = {}", b.im))
                } else if b.re == 0.0 && b.im == 0.0 {
                    violation("hshift: b != 0 required".into())
                } else {
                    Ok(())
                }
            }
            Primitive::HScale { a } => {
                if finite(*a) && *a > 0.0 {
                    Ok(())
                } else {
                    violation(format!("hscale: a > 0 required, got a = {a}"))
                }
            }
            Primitive::HNudge { c } => {
                if !cfinite(*c) {
                    violation("hnudge: c must be finite".into())
                } else if c.im < 0.0 {
                    violation(format!("hnudge: Im c >= 0 required, got Im c = {}", c.im))
                } else {
                    Ok(())
                }
            }
            Primitive::HMobius { a, b, c, d } => {
                let det = a * d - b * c;
                if ![*a, *b, *c, *d].into_iter().all(finite) {
                    violation("hmob: coefficients must be finite".into())
                } else if !(det > 0.0 && det.is_finite()) {
                    violation(format!("hmob: ad - bc > 0 required, got {det}"))
                } else {
                    Ok(())
                }
            }
            Primitive::Blaschke { theta, factors } => {
                if !finite(*theta) {
                    return violation("blaschke: angle must be finite".into());
                }
                if factors.is_empty() {
                    return violation("blaschke: at least one factor required".into());
                }
                for f in factors {
                    if !cfinite(f.zero) || f.zero.norm() >= 1.0 {
                        return violation(format!(
                            "blaschke: zero {} must satisfy |a| < 1",
                            format_complex(f.zero)
                        ));
                    }
                    if f.multiplicity == 0 {
                        return violation("blaschke: multiplicity >= 1 required".into());
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("type error: outer map expects {outer_domain} but inner map produces {inner_codomain}")]
    TypeMismatch {
        outer_domain: Model,
        inner_codomain: Model,
    },
    #[error("type error: iteration needs a self-map, got {domain} -> {codomain}")]
    NotEndo { domain: Model, codomain: Model },
    #[error("iteration count must be at least 1")]
    ZeroIterate,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Prim(Primitive),
    /// `outer ∘ inner`.
    Compose(Box<MapExpr>, Box<MapExpr>),
    Iterate(Box<MapExpr>, u32),
}

/// A well-typed map expression.
#[derive(Clone, Debug, PartialEq)]
pub struct MapExpr {
    node: Node,
    domain: Model,
    codomain: Model,
}

impl MapExpr {
    pub fn prim(p: Primitive) -> Result<Self, MapError> {
        p.validate()?;
        let (domain, codomain) = (p.domain(), p.codomain());
        Ok(Self {
            node: Node::Prim(p),
            domain,
            codomain,
        })
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: MapExpr, inner: MapExpr) -> Result<Self, MapError> {
        if inner.codomain != outer.domain {
            return Err(MapError::TypeMismatch {
                outer_domain: outer.domain,
                inner_codomain: inner.codomain,
            });
        }
        Ok(Self {
            domain: inner.domain,
            codomain: outer.codomain,
            node: Node::Compose(Box::new(outer), Box::new(inner)),
        })
    }

    pub fn iterate(base: MapExpr, n: u32) -> Result<Self, MapError> {
        if !base.is_endo() {
            return Err(MapError::NotEndo {
                domain: base.domain,
                codomain: base.codomain,
            });
        }
        if n == 0 {
            return Err(MapError::ZeroIterate);
        }
        Ok(Self {
            domain: base.domain,
            codomain: base.codomain,
            node: Node::Iterate(Box::new(base), n),
        })
    }

    /// Composes a chain given outermost first; `chain(&[f, g, h])` is `f∘g∘h`.
    pub fn chain(parts: Vec<MapExpr>) -> Result<Self, MapError> {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("chain needs at least one map");
        for next in it {
            acc = MapExpr::compose(acc, next)?;
        }
        Ok(acc)
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn domain(&self) -> Model {
        self.domain
    }

    pub fn codomain(&self) -> Model {
        self.codomain
    }

    pub fn is_endo(&self) -> bool {
        self.domain == self.codomain
    }

    /// Conjugates a half-plane self-map into the disk: `Ψ⁻¹ ∘ self ∘ Ψ`.
    /// Disk self-maps are returned unchanged.
    pub fn to_disk_endo(&self) -> Result<MapExpr, MapError> {
        match (self.domain, self.codomain) {
            (Model::Disk, Model::Disk) => Ok(self.clone()),
            (Model::HalfPlane, Model::HalfPlane) => MapExpr::chain(vec![
                MapExpr::prim(Primitive::InvCayley)?,
                self.clone(),
                MapExpr::prim(Primitive::Cayley)?,
            ]),
            (domain, codomain) => Err(MapError::NotEndo { domain, codomain }),
        }
    }
}

pub(crate) fn format_real(x: f64) -> String {
    format!("{x}")
}

/// Canonical complex literal `a+bi` / `a-bi`.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_real(z.re), sign, format_real(z.im.abs()))
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Cayley | Primitive::InvCayley => f.write_str(self.name()),
            Primitive::Rot { theta } => write!(f, "rot({})", format_real(*theta)),
            Primitive::DiskAut { theta, a } => {
                write!(f, "diskaut({},{})", format_real(*theta), format_complex(*a))
            }
            Primitive::HShift { b } => write!(f, "hshift({})", format_complex(*b)),
            Primitive::HScale { a } => write!(f, "hscale({})", format_real(*a)),
            Primitive::HNudge { c } => write!(f, "hnudge({})", format_complex(*c)),
            Primitive::HMobius { a, b, c, d } => write!(
                f,
                "hmob({},{},{},{})",
                format_real(*a),
                format_real(*b),
                format_real(*c),
                format_real(*d)
            ),
            Primitive::Blaschke { theta, factors } => {
                write!(f, "blaschke({};", format_real(*theta))?;
                for (k, fac) in factors.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "({},{})", format_complex(fac.zero), fac.multiplicity)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl MapExpr {
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Prim(p) => write!(f, "{p}"),
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Prim(p) => write!(f, "{p}"),
            Node::Iterate(base, n) => {
                base.fmt_atom(f)?;
                write!(f, "^{n}")
            }
            Node::Compose(outer, inner) => {
                // "." is left-associative, so only a composite on the right needs parentheses
                write!(f, "{outer} . ")?;
                match inner.node {
                    Node::Compose(..) => inner.fmt_atom(f),
                    _ => write!(f, "{inner}"),
                }
            }
        }
    }
}

/// Canonical text of an expression; inverse of [`parse_map`].
pub fn format_map(m: &MapExpr) -> String {
    m.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_literals() {
        let m = MapExpr::prim(Primitive::HShift {
            b: Complex64::new(1.0, 0.0),
        })
        .unwrap();
        assert_eq!(format_map(&m), "hshift(1+0i)");
        assert_eq!(format_complex(Complex64::new(-0.3, -1.0)), "-0.3-1i");
        let sq = MapExpr::prim(Primitive::Blaschke {
            theta: 0.0,
            factors: vec![BlaschkeFactor {
                zero: Complex64::new(0.0, 0.0),
                multiplicity: 2,
            }],
        })
        .unwrap();
        assert_eq!(format_map(&sq), "blaschke(0;(0+0i,2))");
    }

    #[test]
    fn constraints_are_enforced() {
        let bad = [
            Primitive::HShift { b: Complex64::new(0.0, 0.0) },
            Primitive::HShift { b: Complex64::new(1.0, -0.1) },
            Primitive::HScale { a: 0.0 },
            Primitive::HNudge { c: Complex64::new(0.0, -1.0) },
            Primitive::DiskAut { theta: 0.0, a: Complex64::new(1.0, 0.0) },
            Primitive::HMobius { a: 0.0, b: 1.0, c: 1.0, d: 0.0 },
            Primitive::Blaschke { theta: 0.0, factors: vec![] },
        ];
        for p in bad {
            assert!(matches!(MapExpr::prim(p), Err(MapError::Constraint(_))));
        }
    }

    #[test]
    fn composition_is_type_checked() {
        let c = MapExpr::prim(Primitive::Cayley).unwrap();
        let err = MapExpr::compose(c.clone(), c.clone()).unwrap_err();
        assert_eq!(
            err,
            MapError::TypeMismatch {
                outer_domain: Model::Disk,
                inner_codomain: Model::HalfPlane
            }
        );
        assert!(matches!(MapExpr::iterate(c, 2), Err(MapError::NotEndo { .. })));
    }

    #[test]
    fn nested_structure_prints_with_parentheses() {
        let shift = MapExpr::prim(Primitive::HShift { b: Complex64::new(1.0, 0.0) }).unwrap();
        let scale = MapExpr::prim(Primitive::HScale { a: 2.0 }).unwrap();
        let right = MapExpr::compose(shift.clone(), MapExpr::compose(scale.clone(), shift.clone()).unwrap()).unwrap();
        assert_eq!(format_map(&right), "hshift(1+0i) . (hscale(2) . hshift(1+0i))");
        let it = MapExpr::iterate(MapExpr::iterate(shift, 2).unwrap(), 3).unwrap();
        assert_eq!(format_map(&it), "(hshift(1+0i)^2)^3");
    }
}
