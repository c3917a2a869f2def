use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use parabolic_lab::dynamics::{classify, ClassifyOptions, Classification};
use parabolic_lab::geometry::{cayley, cayley_inverse, distance, MobiusAut, Model, Point};
use parabolic_lab::lab::fuzz::{random_tree, round_trips};
use parabolic_lab::map::{format_map, parse_map};

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.95f64, -PI..PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn half_point() -> impl Strategy<Value = Complex64> {
    (-50.0..50.0f64, 1e-3..50.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #[test]
    fn disk_automorphisms_are_isometries(z in disk_point(), w in disk_point(), a in disk_point(), theta in -PI..PI) {
        let (z, w) = (Point::disk(z).unwrap(), Point::disk(w).unwrap());
        let g = MobiusAut::disk(theta, a).unwrap();
        let before = distance(&z, &w).unwrap().value();
        let after = distance(&g.apply(&z).unwrap(), &g.apply(&w).unwrap()).unwrap().value();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before), "{before} {after}");
    }

    #[test]
    fn half_plane_automorphisms_are_isometries(z in half_point(), w in half_point(), b in -3.0..3.0f64, c in -3.0..3.0f64) {
        // a = 1, d chosen so that ad - bc = 1
        let g = MobiusAut::half_plane(1.0, b, c, 1.0 + b * c).unwrap();
        let (z, w) = (Point::half_plane(z).unwrap(), Point::half_plane(w).unwrap());
        let before = distance(&z, &w).unwrap().value();
        let after = distance(&g.apply(&z).unwrap(), &g.apply(&w).unwrap()).unwrap().value();
        prop_assert!((before - after).abs() <= 1e-7 * (1.0 + before), "{before} {after}");
    }

    #[test]
    fn cayley_round_trip(z in disk_point()) {
        let p = Point::disk(z).unwrap();
        let back = cayley_inverse(&cayley(&p).unwrap()).unwrap();
        prop_assert!((back.coord() - z).norm() < 1e-12);
    }

    #[test]
    fn random_trees_round_trip(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = if seed % 2 == 0 { Model::Disk } else { Model::HalfPlane };
        let m = random_tree(&mut rng, domain, depth);
        prop_assert!(round_trips(&m), "{}", format_map(&m));
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,40}") {
        if let Err(e) = parse_map(&text) {
            prop_assert!(e.offset <= text.len());
        }
    }

    #[test]
    fn derivative_matches_difference_quotient(seed in any::<u64>(), z in (0.0..0.6f64, -PI..PI)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = parabolic_lab::lab::fuzz::random_disk_endo(&mut rng, 2);
        let p = Point::disk(Complex64::from_polar(z.0, z.1)).unwrap();
        let d = m.deriv(&p).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for dir in [Complex64::new(h, 0.0), Complex64::new(0.0, h)] {
            let plus = m.eval(&Point::disk(p.coord() + dir).unwrap()).unwrap().coord();
            let minus = m.eval(&Point::disk(p.coord() - dir).unwrap()).unwrap().coord();
            worst = worst.max(((plus - minus) / (2.0 * dir) - d).norm());
        }
        prop_assert!(worst <= 1e-5 * (1.0 + d.norm()), "{} at {}: {worst}", format_map(&m), p.coord());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Classification does not depend on which rotation of the disk one works in.
    #[test]
    fn rotation_conjugates_classify_alike(alpha in -3.0..3.0f64, which in 0usize..4) {
        let base = [
            "invcayley . hscale(2) . cayley",
            "invcayley . hshift(1+0i) . cayley",
            "invcayley . hshift(0+1i) . cayley",
            "blaschke(0;(0+0i,2))",
        ][which];
        let conj = format!("rot({}) . {base} . rot({})", -alpha, alpha);
        let opts = ClassifyOptions::default();
        let a = classify(&parse_map(base).unwrap(), &opts).unwrap();
        let b = classify(&parse_map(&conj).unwrap(), &opts).unwrap();
        prop_assert_eq!(a.name(), b.name());
        prop_assert_eq!(a.step_class(), b.step_class());
        if let (Classification::Hyperbolic { lambda: la, .. }, Classification::Hyperbolic { lambda: lb, tau }) = (&a, &b) {
            prop_assert!((la - lb).abs() <= 1e-6);
            prop_assert!((tau - Complex64::from_polar(1.0, -alpha)).norm() <= 1e-6);
        }
    }
}
