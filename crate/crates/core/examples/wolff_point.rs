//! Locating the Denjoy–Wolff point and moving to the half-plane frame.

use parabolic_lab::dynamics::{estimate_wolff, Frame, WolffKind, WolffOptions};
use parabolic_lab::map::{format_map, parse_map};

fn main() {
    for text in [
        "blaschke(0;(0.3+0i,1),(0+0i,1))",
        "invcayley . hscale(0.5) . cayley",
        "rot(-1) . invcayley . hshift(2+0.5i) . cayley . rot(1)",
    ] {
        let m = parse_map(text).unwrap();
        let est = estimate_wolff(&m, &WolffOptions::default()).unwrap();
        match est.kind {
            WolffKind::InteriorFixed { point, multiplier } => {
                println!("{text}\n  interior fixed point {point}, f' = {multiplier}")
            }
            WolffKind::Boundary { tau } => {
                let frame = Frame::new(&m).unwrap();
                println!("{text}\n  Wolff point {tau} (spread {:.1e})", est.seed_spread);
                println!("  half-plane conjugate: {}", format_map(frame.working()));
            }
        }
    }
}
