//! Narrow escape toolkit: asymptotic mean sojourn times of a drift-diffusion in a
//! ball with a small absorbing geodesic window, the singular disk operators they are
//! built from, and a Monte Carlo oracle for cross-validation.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the command line tool uses.

// `!(x > 0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod disk_operators;
pub mod error;
pub mod geometry;
pub mod mc_escape;
pub mod green_kernel;
pub mod potential;
pub mod quadrature;
pub mod scalar;
pub mod vec3;

pub use error::{NekError, Result};
pub use scalar::{pairwise_sum, Scalar};
pub use vec3::Vec3;

pub type Point = Vec3<f64>;
pub type Domain = geometry::DomainModel<f64>;
pub type Frame = geometry::BoundaryFrame<f64>;
pub type Window = geometry::WindowSpec<f64>;
