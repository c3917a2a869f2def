//! Ratio and slope limits of parabolic maps.

use num_complex::Complex64;
use parabolic_lab::dynamics::default_seeds;
use parabolic_lab::geometry::Point;
use parabolic_lab::map::parse_map;
use parabolic_lab::valiron::{arg_dichotomy_check, ratio_sequence, slope_propagation_check, ParabolicMap};

fn main() {
    let base = Point::disk(Complex64::new(0.0, 0.0)).unwrap();
    let probe = Point::disk(Complex64::new(0.3, 0.3)).unwrap();
    for text in [
        "invcayley . hshift(1+1i) . cayley",
        "invcayley . hshift(-1+0i) . cayley",
        "invcayley . hnudge(1+0i) . cayley",
    ] {
        let pm = ParabolicMap::new(&parse_map(text).unwrap()).unwrap();
        let r = ratio_sequence(&pm, &probe, &base, 10_000).unwrap();
        println!("{text}\n  step {:?}, |Q_N - 1| = {:.2e}", pm.step_class(), r.error);
        let prop = slope_propagation_check(&pm, &default_seeds(), 10_000, 1e-2).unwrap();
        println!("  slopes: {:?}", prop.verdict);
        if let Ok(d) = arg_dichotomy_check(&pm, &default_seeds(), 10_000) {
            println!("  argument limit: {:?}, disk slope {:.6}", d.verdict, d.slopes[0].sigma_hat);
        }
    }
}
