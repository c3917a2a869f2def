use serde::Serialize;

use super::orbit::{check_monotone, iterate_working, step_distances};
use super::{DynamicsError, Frame, Result};
use crate::geometry::Point;
use crate::map::MapExpr;

pub const DEFAULT_STEP_N: usize = 10_000;
pub const DEFAULT_EPS_ZERO: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepVerdict {
    Zero,
    Positive,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepEstimate {
    pub probe: Point,
    /// `d_N`.
    pub d_tail: f64,
    /// `d_N / d_{N/2}`.
    pub tail_ratio: f64,
    pub s_hat: f64,
    pub verdict: StepVerdict,
    /// Index actually reached (smaller than requested after an escape).
    pub n_used: usize,
}

impl Frame {
    /// Limiting hyperbolic step at `z` from the tail of `d_n`.
    pub fn step_estimate(&self, z: &Point, n: usize, eps_zero: f64) -> Result<StepEstimate> {
        if n < 2 {
            return Err(DynamicsError::InvalidArgument("step estimate needs N >= 2".into()));
        }
        // d_N needs w_{N+1}
        let (points, _) = iterate_working(self.working(), self.to_working(z)?, n + 1)?;
        let d = step_distances(self.model(), &points);
        check_monotone(self.model(), &points, &d)?;
        let n_used = d.len() - 1;
        let d_tail = d[n_used];
        let tail_ratio = if d_tail == 0.0 { 0.0 } else { d_tail / d[n_used / 2] };
        let verdict = if d_tail == 0.0 || (d_tail < eps_zero && tail_ratio < 0.9) {
            StepVerdict::Zero
        } else if d_tail > 10.0 * eps_zero && tail_ratio > 0.99 {
            StepVerdict::Positive
        } else {
            StepVerdict::Undecided
        };
        Ok(StepEstimate {
            probe: *z,
            d_tail,
            tail_ratio,
            s_hat: d_tail,
            verdict,
            n_used,
        })
    }
}

/// See [`Frame::step_estimate`].
pub fn step_estimate(m: &MapExpr, z: &Point, n: usize, eps_zero: f64) -> Result<StepEstimate> {
    Frame::new(m)?.step_estimate(z, n, eps_zero)
}
