//! Built-in maps with known dynamics.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::StepVerdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedStep {
    Zero,
    Positive,
}

impl ExpectedStep {
    pub fn verdict(self) -> StepVerdict {
        match self {
            ExpectedStep::Zero => StepVerdict::Zero,
            ExpectedStep::Positive => StepVerdict::Positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub dsl: String,
    pub class: ExpectedClass,
    #[serde(default)]
    pub step: Option<ExpectedStep>,
    /// Disk multiplier at the Wolff point, for hyperbolic entries.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Limit of `arg Fⁿ(w)` in the half-plane frame.
    #[serde(default)]
    pub arg_limit: Option<f64>,
    /// `b` when the half-plane map is the translation `w ↦ w + b`.
    #[serde(default)]
    pub translation: Option<[f64; 2]>,
    #[serde(default)]
    pub note: String,
}

impl CatalogEntry {
    /// Disk slope `−i e^{−iφ}` at `τ = 1` implied by the argument limit.
    pub fn slope(&self) -> Option<Complex64> {
        self.arg_limit
            .map(|phi| Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -phi))
    }

    /// Exact `d_N` for translations started at height `y0`: `w_n = w + nb`, so
    /// `tanh d_N = |b| / |2i(y0 + N Im b) + b|`.
    pub fn translation_step(&self, y0: f64, n: usize) -> Option<f64> {
        let [re, im] = self.translation?;
        let b = Complex64::new(re, im);
        let y = y0 + n as f64 * im;
        Some((b.norm() / (Complex64::new(0.0, 2.0 * y) + b).norm()).atanh())
    }

    pub fn is_consistent(&self) -> Result<(), String> {
        let boundary = self.class != ExpectedClass::Elliptic;
        if self.arg_limit.is_some() && !boundary {
            return Err(format!("{}: slope given for a map with an interior fixed point", self.name));
        }
        if self.step.is_some() != (self.class == ExpectedClass::Parabolic) {
            return Err(format!("{}: step class is given exactly for parabolic maps", self.name));
        }
        if self.lambda.is_some() != (self.class == ExpectedClass::Hyperbolic) {
            return Err(format!("{}: multiplier is given exactly for hyperbolic maps", self.name));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(format!("{}: hyperbolic multiplier {l} outside (0, 1)", self.name));
            }
        }
        if let (Some(ExpectedStep::Positive), Some(phi)) = (self.step, self.arg_limit) {
            if phi.abs() > 1e-12 && (phi - PI).abs() > 1e-12 {
                return Err(format!("{}: positive step requires argument limit 0 or pi", self.name));
            }
        }
        Ok(())
    }
}

fn entry(
    name: &str,
    dsl: &str,
    class: ExpectedClass,
    step: Option<ExpectedStep>,
    lambda: Option<f64>,
    arg_limit: Option<f64>,
    translation: Option<[f64; 2]>,
    note: &str,
) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        dsl: dsl.into(),
        class,
        step,
        lambda,
        arg_limit,
        translation,
        note: note.into(),
    }
}

/// The nine reference maps.
pub fn builtin() -> Vec<CatalogEntry> {
    use ExpectedClass::*;
    use ExpectedStep::*;
    vec![
        entry(
            "elliptic_rot",
            "rot(2)",
            Elliptic,
            None,
            None,
            None,
            None,
            "rotation by 2 rad fixes 0 with |f'(0)| = 1",
        ),
        entry(
            "square",
            "blaschke(0;(0+0i,2))",
            Elliptic,
            None,
            None,
            None,
            None,
            "z^2 fixes 0 with f'(0) = 0; orbits collapse to 0",
        ),
        entry(
            "hyperbolic_2",
            "invcayley . hscale(2) . cayley",
            Hyperbolic,
            None,
            Some(0.5),
            None,
            None,
            "F(w) = 2w, so F'(inf) = 2 and f'(1) = 1/2",
        ),
        entry(
            "hyperbolic_nonaut",
            "invcayley . hnudge(0+0i) . hscale(2) . cayley",
            Hyperbolic,
            None,
            Some(0.5),
            None,
            None,
            "F(w) = 2w - 1/(2w+i), F(w)/w -> 2",
        ),
        entry(
            "parabolic_aut_pos",
            "invcayley . hshift(1+0i) . cayley",
            Parabolic,
            Some(Positive),
            None,
            Some(0.0),
            Some([1.0, 0.0]),
            "translation w+1: step atanh(1/sqrt(5)) from i, arg F^n = atan(1/n) -> 0, slope -i",
        ),
        entry(
            "parabolic_pos_nonaut",
            "invcayley . hnudge(1+0i) . cayley",
            Parabolic,
            Some(Positive),
            None,
            Some(0.0),
            None,
            "w + 1 - 1/(w+i): Im w_n increases to a finite L, Re w_n ~ n, so arg -> 0 and step atanh(1/|2iL+1|)",
        ),
        entry(
            "parabolic_zero",
            "invcayley . hshift(0+1i) . cayley",
            Parabolic,
            Some(Zero),
            None,
            Some(FRAC_PI_2),
            Some([0.0, 1.0]),
            "vertical translation w+i: d_n = atanh(1/(2n+3)) from i, radial slope -1",
        ),
        entry(
            "parabolic_zero_slanted",
            "invcayley . hshift(1+1i) . cayley",
            Parabolic,
            Some(Zero),
            None,
            Some(FRAC_PI_4),
            Some([1.0, 1.0]),
            "w_n = w + n(1+i): non-tangential at angle pi/4, zero step",
        ),
        entry(
            "parabolic_zero_mirrored",
            "invcayley . hshift(-1+0i) . cayley",
            Parabolic,
            Some(Positive),
            None,
            Some(PI),
            Some([-1.0, 0.0]),
            "w_n = w - n: a real translation, so the step is positive; arg F^n -> pi, slope +i",
        ),
    ]
}

/// Looks up a built-in entry by name.
pub fn find(name: &str) -> Option<CatalogEntry> {
    builtin().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{format_map, parse_map};

    #[test]
    fn entries_parse_and_are_consistent() {
        let all = builtin();
        assert_eq!(all.len(), 9);
        for e in &all {
            let m = parse_map(&e.dsl).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert!(m.is_endo());
            assert_eq!(format_map(&m), e.dsl);
            e.is_consistent().unwrap();
        }
    }

    #[test]
    fn closed_form_steps() {
        let pos = find("parabolic_aut_pos").unwrap();
        assert!((pos.translation_step(1.0, 10_000).unwrap() - 0.4812118251).abs() < 1e-10);
        let zero = find("parabolic_zero").unwrap();
        let n = 10_000;
        assert!((zero.translation_step(1.0, n).unwrap() - (1.0 / (2.0 * n as f64 + 3.0)).atanh()).abs() < 1e-18);
        assert!((find("parabolic_aut_pos").unwrap().slope().unwrap() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((zero.slope().unwrap() + 1.0).norm() < 1e-15);
    }
}
