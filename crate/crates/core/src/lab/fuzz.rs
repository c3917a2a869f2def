//! Random expression trees and parser fuzz inputs.

use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::Model;
use crate::map::{format_map, parse_map, BlaschkeFactor, MapExpr, Primitive};

fn short_real<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.2) {
        // full-precision values exercise the shortest round-trip formatting
        rng.gen_range(-4.0..4.0)
    } else {
        rng.gen_range(-400i32..400) as f64 / 100.0
    }
}

fn disk_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(-3.0..3.0))
}

fn upper_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let z = Complex64::new(short_real(rng), short_real(rng).abs());
    if z == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 1.0)
    } else {
        z
    }
}

/// A random primitive with the given domain.
pub fn random_primitive<R: Rng>(rng: &mut R, domain: Model) -> Primitive {
    match domain {
        Model::Disk => match rng.gen_range(0..4) {
            0 => Primitive::Cayley,
            1 => Primitive::Rot { theta: short_real(rng) },
            2 => Primitive::DiskAut {
                theta: short_real(rng),
                a: disk_complex(rng),
            },
            _ => Primitive::Blaschke {
                theta: short_real(rng),
                factors: (0..rng.gen_range(1..4))
                    .map(|_| BlaschkeFactor {
                        zero: disk_complex(rng),
                        multiplicity: rng.gen_range(1..4),
                    })
                    .collect(),
            },
        },
        Model::HalfPlane => match rng.gen_range(0..5) {
            0 => Primitive::InvCayley,
            1 => Primitive::HShift { b: upper_complex(rng) },
            2 => Primitive::HScale {
                a: rng.gen_range(1i32..500) as f64 / 100.0,
            },
            3 => Primitive::HNudge { c: upper_complex(rng) },
            _ => {
                let (a, b, c) = (short_real(rng), short_real(rng), short_real(rng));
                // choose d so that ad - bc = 1 when a != 0
                let d = if a != 0.0 { (1.0 + b * c) / a } else { 1.0 };
                if a * d - b * c > 0.0 {
                    Primitive::HMobius { a, b, c, d }
                } else {
                    Primitive::HScale { a: 2.0 }
                }
            }
        },
    }
}

/// A random well-typed expression with the given domain and up to `depth`
/// levels of composition or iteration.
pub fn random_tree<R: Rng>(rng: &mut R, domain: Model, depth: usize) -> MapExpr {
    let leaf = |rng: &mut R| MapExpr::prim(random_primitive(rng, domain)).expect("generated primitives are valid");
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng);
    }
    if rng.gen_bool(0.75) {
        let inner = random_tree(rng, domain, depth - 1);
        let outer = random_tree(rng, inner.codomain(), depth - 1);
        MapExpr::compose(outer, inner).expect("domains match by construction")
    } else {
        let base = random_tree(rng, domain, depth - 1);
        if base.is_endo() {
            MapExpr::iterate(base, rng.gen_range(1..5)).expect("self-map")
        } else {
            base
        }
    }
}

/// A random self-map of the disk.
pub fn random_disk_endo<R: Rng>(rng: &mut R, depth: usize) -> MapExpr {
    random_tree(rng, Model::Disk, depth)
        .to_disk_endo()
        .unwrap_or_else(|_| MapExpr::prim(Primitive::Rot { theta: 1.0 }).expect("valid"))
}

/// `parse(format(m)) == m`.
pub fn round_trips(m: &MapExpr) -> bool {
    parse_map(&format_map(m)).is_ok_and(|back| back == *m)
}

const TOKENS: &[&str] = &[
    "cayley", "invcayley", "rot", "diskaut", "hshift", "hscale", "hnudge", "hmob", "blaschke", "(", ")", ".", "^",
    ",", ";", " ", "0", "1", "2", "-", "+", "i", "0.5", "1e309", "-0", "nan", "inf", "1+0i", "0-0.3i", "(0+0i,2)",
    "^0", "^99999999999", "..", "((", "))", "x", "é", "\u{0}",
];

/// A random parser input: token soup, raw characters, or a mutated seed text.
pub fn random_input<R: Rng>(rng: &mut R, seeds: &[String]) -> String {
    match rng.gen_range(0..3) {
        0 => (0..rng.gen_range(0..24)).map(|_| *TOKENS.choose(rng).expect("non-empty")).collect(),
        1 => (0..rng.gen_range(0..40))
            .map(|_| if rng.gen_bool(0.9) { rng.gen_range(' '..='~') } else { rng.gen::<char>() })
            .collect(),
        _ => {
            let mut chars: Vec<char> = seeds.choose(rng).map_or_else(String::new, |s| s.clone()).chars().collect();
            for _ in 0..rng.gen_range(1..4) {
                let at = rng.gen_range(0..=chars.len());
                match rng.gen_range(0..3) {
                    0 if at < chars.len() => {
                        chars.remove(at);
                    }
                    1 if at < chars.len() => chars[at] = rng.gen_range(' '..='~'),
                    _ => chars.insert(at, rng.gen_range(' '..='~')),
                }
            }
            chars.into_iter().collect()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FuzzSummary {
    pub inputs: usize,
    pub accepted: usize,
    pub crashes: Vec<String>,
    /// Inputs with an error offset past the end of the text.
    pub bad_offsets: Vec<String>,
    /// Accepted inputs whose canonical form does not parse back to the same tree.
    pub unstable: Vec<String>,
}

/// Feeds `count` random inputs to the parser.
pub fn fuzz_parser<R: Rng>(rng: &mut R, count: usize, seeds: &[String]) -> FuzzSummary {
    let mut summary = FuzzSummary {
        inputs: count,
        ..Default::default()
    };
    for _ in 0..count {
        let text = random_input(rng, seeds);
        match catch_unwind(AssertUnwindSafe(|| parse_map(&text))) {
            Err(_) => summary.crashes.push(text),
            Ok(Ok(m)) => {
                summary.accepted += 1;
                if !round_trips(&m) {
                    summary.unstable.push(text);
                }
            }
            Ok(Err(e)) => {
                if e.offset > text.len() {
                    summary.bad_offsets.push(text);
                }
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_trees_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let m = random_tree(&mut rng, Model::Disk, 4);
            assert!(round_trips(&m), "{m}");
        }
    }

    #[test]
    fn short_fuzz_run_is_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seeds = vec!["invcayley . hshift(1+0i) . cayley".to_string()];
        let s = fuzz_parser(&mut rng, 2000, &seeds);
        assert!(s.crashes.is_empty() && s.bad_offsets.is_empty() && s.unstable.is_empty(), "{s:?}");
        assert!(s.accepted > 0);
    }
}
