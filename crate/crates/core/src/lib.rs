//! Numerical laboratory for holomorphic self-maps of the unit disk and the
//! upper half-plane, with an emphasis on parabolic dynamics.

pub mod accel;
pub mod dynamics;
pub mod geometry;
pub mod lab;
pub mod map;
pub mod straightening;
pub mod valiron;
