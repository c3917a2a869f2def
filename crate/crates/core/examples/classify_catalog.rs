//! Classifies every built-in map and compares with its expected class.

use parabolic_lab::dynamics::{classify, ClassifyOptions, Classification};
use parabolic_lab::lab::catalog::builtin;
use parabolic_lab::map::parse_map;

fn main() {
    let opts = ClassifyOptions::default();
    for e in builtin() {
        let m = parse_map(&e.dsl).unwrap();
        let c = classify(&m, &opts).unwrap();
        let extra = match &c {
            Classification::Elliptic { fixed, .. } => format!("fixed point {fixed}"),
            Classification::Hyperbolic { lambda, .. } => format!("multiplier {lambda:.6}"),
            Classification::Parabolic { step_class, .. } => format!("step {step_class:?}"),
        };
        println!("{:<24} {:<11} {extra}", e.name, c.name());
    }
}
