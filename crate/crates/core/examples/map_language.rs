//! Parsing, type checking, simplifying and evaluating map expressions.

use num_complex::Complex64;
use parabolic_lab::geometry::Point;
use parabolic_lab::map::{format_map, parse_map, simplify};

fn main() {
    let text = "invcayley . hshift(1+0i) . cayley . rot(0.5)";
    let m = parse_map(text).expect("valid expression");
    println!("{text}\n  domain {} codomain {}", m.domain(), m.codomain());
    println!("  simplified: {}", format_map(&simplify(&m)));

    let z = Point::disk(Complex64::new(0.2, -0.1)).unwrap();
    println!("  f(z)  = {}", m.eval(&z).unwrap().coord());
    println!("  f'(z) = {}", m.deriv(&z).unwrap());
    println!("  f^10(z) = {}", m.iterate_eval(&z, 10).unwrap().coord());

    for bad in ["rot(x)", "cayley . cayley", "hshift(1-1i)"] {
        println!("{bad:>16} -> {}", parse_map(bad).unwrap_err());
    }
}
