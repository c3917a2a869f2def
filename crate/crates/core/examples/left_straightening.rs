//! Straightening limits at two base points and the automorphism relating them.

use num_complex::Complex64;
use parabolic_lab::dynamics::Frame;
use parabolic_lab::geometry::Point;
use parabolic_lab::map::parse_map;
use parabolic_lab::straightening::{
    default_grid, ensure_grid, step_via_straightening, straightening_equivalence, straightening_limit, DEFAULT_MAX_N,
    DEFAULT_TOL,
};

fn main() {
    let c = Complex64::new;
    let frame = Frame::new(&parse_map("invcayley . hnudge(1+0i) . cayley").unwrap()).unwrap();
    let grid = ensure_grid(c(0.3, 0.0), c(0.5, 0.0), &default_grid(c(0.0, 0.0), c(0.5, 0.0)));
    let a = straightening_limit(&frame, c(0.0, 0.0), c(0.5, 0.0), &grid, DEFAULT_MAX_N, DEFAULT_TOL).unwrap();
    let b = straightening_limit(&frame, c(0.3, 0.0), c(0.5, 0.0), &grid, DEFAULT_MAX_N, DEFAULT_TOL).unwrap();
    println!("base 0:   n = {}, change {:.2e}, constant {}", a.n, a.last_change, a.constant);
    println!("base 0.3: n = {}, change {:.2e}, constant {}", b.n, b.last_change, b.constant);

    let fit = straightening_equivalence(&a, &b, 1e-3).unwrap();
    println!("fitted automorphism {:?}, residual {:.2e}", fit.phi, fit.residual);

    let z = Point::disk(c(0.0, 0.0)).unwrap();
    let s = step_via_straightening(&a, &frame, &z).unwrap();
    println!("step at 0 through the straightening: {s:.6}");
}
