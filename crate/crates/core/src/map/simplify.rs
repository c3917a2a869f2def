//! Exact algebraic rewriting of composition chains.
//!
//! Cancels adjacent Cayley/inverse-Cayley pairs and moves disk rotations
//! across the Cayley transform, where they become elliptic half-plane
//! automorphisms. The result evaluates identically (up to rounding) and
//! avoids round trips through the disk near its boundary.

use super::{MapExpr, Node, Primitive};

fn flatten(m: &MapExpr, out: &mut Vec<MapExpr>) {
    match m.node() {
        Node::Compose(outer, inner) => {
            flatten(outer, out);
            flatten(inner, out);
        }
        Node::Iterate(base, n) => {
            let inner = simplify(base);
            let mut parts = Vec::new();
            flatten(&inner, &mut parts);
            // Ψ⁻¹∘G∘Ψ iterated is Ψ⁻¹∘Gⁿ∘Ψ
            let conj = parts.len() >= 3
                && is_prim(&parts[0], |p| matches!(p, Primitive::InvCayley))
                && is_prim(&parts[parts.len() - 1], |p| matches!(p, Primitive::Cayley));
            if conj {
                let last = parts.len() - 1;
                let middle: Vec<MapExpr> = parts[1..last].to_vec();
                let g = MapExpr::chain(middle).expect("sub-chain of a well-typed chain");
                out.push(parts[0].clone());
                out.push(MapExpr::iterate(g, *n).expect("middle of a conjugated self-map is a self-map"));
                out.push(parts[last].clone());
            } else {
                out.push(MapExpr::iterate(inner, *n).expect("simplified base keeps its type"));
            }
        }
        Node::Prim(_) => out.push(m.clone()),
    }
}

fn is_prim(m: &MapExpr, pred: impl Fn(&Primitive) -> bool) -> bool {
    matches!(m.node(), Node::Prim(p) if pred(p))
}

fn prim_of(m: &MapExpr) -> Option<&Primitive> {
    match m.node() {
        Node::Prim(p) => Some(p),
        _ => None,
    }
}

/// `Ψ ∘ rot(α) ∘ Ψ⁻¹` as a half-plane matrix.
fn rotation_in_half_plane(alpha: f64) -> Primitive {
    let (s, c) = (0.5 * alpha).sin_cos();
    Primitive::HMobius { a: c, b: s, c: -s, d: c }
}

fn mk(p: Primitive) -> MapExpr {
    MapExpr::prim(p).expect("rewrite produces valid primitives")
}

/// One pass of local rewrites; returns `true` if anything changed.
fn rewrite(parts: &mut Vec<MapExpr>) -> bool {
    for k in 0..parts.len() {
        let Some(p) = prim_of(&parts[k]) else { continue };
        // drop identities, unless it is the only factor left
        let identity = match p {
            Primitive::Rot { theta } => *theta == 0.0,
            Primitive::HMobius { a, b, c, d } => *b == 0.0 && *c == 0.0 && a == d,
            _ => false,
        };
        if identity && parts.len() > 1 {
            parts.remove(k);
            return true;
        }
        if k + 1 >= parts.len() {
            continue;
        }
        let Some(q) = prim_of(&parts[k + 1]) else { continue };
        let replacement: Option<Vec<MapExpr>> = match (p, q) {
            (Primitive::Cayley, Primitive::InvCayley) | (Primitive::InvCayley, Primitive::Cayley) => Some(vec![]),
            (Primitive::Cayley, Primitive::Rot { theta }) => {
                Some(vec![mk(rotation_in_half_plane(*theta)), mk(Primitive::Cayley)])
            }
            (Primitive::Rot { theta }, Primitive::InvCayley) => {
                Some(vec![mk(Primitive::InvCayley), mk(rotation_in_half_plane(*theta))])
            }
            (Primitive::Rot { theta: t1 }, Primitive::Rot { theta: t2 }) => {
                Some(vec![mk(Primitive::Rot { theta: t1 + t2 })])
            }
            (
                Primitive::HMobius { a: a1, b: b1, c: c1, d: d1 },
                Primitive::HMobius { a: a2, b: b2, c: c2, d: d2 },
            ) => {
                let (a, b) = (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2);
                let (c, d) = (c1 * a2 + d1 * c2, c1 * b2 + d1 * d2);
                let s = (a * d - b * c).sqrt();
                Some(vec![mk(Primitive::HMobius {
                    a: a / s,
                    b: b / s,
                    c: c / s,
                    d: d / s,
                })])
            }
            _ => None,
        };
        if let Some(rep) = replacement {
            if rep.is_empty() && parts.len() == 2 {
                // Ψ∘Ψ⁻¹ or Ψ⁻¹∘Ψ alone: keep an explicit identity of the right model
                let id = match p {
                    Primitive::Cayley => Primitive::HMobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 },
                    _ => Primitive::Rot { theta: 0.0 },
                };
                parts.splice(k..k + 2, [mk(id)]);
            } else {
                parts.splice(k..k + 2, rep);
            }
            return true;
        }
    }
    false
}

/// Composition factors of `m`, outermost first.
pub(crate) fn factors(m: &MapExpr) -> Vec<MapExpr> {
    let mut parts = Vec::new();
    flatten(m, &mut parts);
    parts
}

/// Rewrites `m` into an equivalent, flatter expression.
pub fn simplify(m: &MapExpr) -> MapExpr {
    let mut parts = Vec::new();
    flatten(m, &mut parts);
    while rewrite(&mut parts) {}
    MapExpr::chain(parts).expect("rewrites preserve typing")
}
