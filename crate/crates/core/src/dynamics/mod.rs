//! Iteration of self-maps: Denjoy–Wolff point, orbits, multipliers,
//! classification and the hyperbolic step.
//!
//! Once a boundary Wolff point `τ` is found, all dynamics run on the
//! half-plane conjugate `F = Ψ ∘ (τ̄ f(τ ·)) ∘ Ψ⁻¹`, whose Wolff point is `∞`.
//! Orbits then grow instead of crowding the unit circle.

mod classify;
mod frame;
mod orbit;
mod step;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::map::{EvalError, MapError};

pub use classify::{classify, estimate_multiplier, ClassifyOptions, Classification, MultiplierEstimate};
pub use frame::{
    conjugate_to_halfplane, default_seeds, estimate_wolff, Frame, FrameKind, WolffEstimate, WolffKind, WolffOptions,
};
pub use orbit::{nontangential_diagnostic, orbit, two_point_contraction, NontangentialReport, OrbitRecord};
pub(crate) use orbit::iterate_working;
pub use step::{step_estimate, StepEstimate, StepVerdict, DEFAULT_EPS_ZERO, DEFAULT_STEP_N};

/// Schwarz–Pick slack allowed between consecutive step distances.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("orbit collapsed onto the unit circle at step {step}")]
    BoundaryCollapse { step: usize },
    #[error("step distances increased at n = {n}: {before} -> {after}")]
    NotMonotone { n: usize, before: f64, after: f64 },
    #[error("|tau| = {0} is not 1")]
    NotUnimodular(f64),
    #[error("undecided: {0}")]
    Undecided(String),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
