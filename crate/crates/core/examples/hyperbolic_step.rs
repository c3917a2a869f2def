//! Step estimates and orbit diagnostics for a zero-step and a positive-step map.

use num_complex::Complex64;
use parabolic_lab::dynamics::{default_seeds, nontangential_diagnostic, Frame};
use parabolic_lab::map::parse_map;
use parabolic_lab::geometry::Point;

fn main() {
    for text in ["invcayley . hshift(0+1i) . cayley", "invcayley . hnudge(1+0i) . cayley"] {
        let frame = Frame::new(&parse_map(text).unwrap()).unwrap();
        println!("{text}");
        for p in default_seeds() {
            let s = frame.step_estimate(&p, 10_000, 1e-3).unwrap();
            println!("  z = {:<10} s ≈ {:.6e}  d_N/d_N/2 = {:.4}  {:?}", p.coord().to_string(), s.s_hat, s.tail_ratio, s.verdict);
        }
        let orbit = frame.orbit(&Point::disk(Complex64::new(0.0, 0.0)).unwrap(), 10_000).unwrap();
        let diag = nontangential_diagnostic(&orbit).unwrap();
        println!("  cone: eps over last decade {:.3e}, non-tangential {}", diag.eps_last_decade, diag.nontangential);
    }
}
