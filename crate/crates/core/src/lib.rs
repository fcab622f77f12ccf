//! Transient acoustic scattering in two dimensions by a symmetric coupling of
//! finite elements (inside the obstacles) with Galerkin boundary elements
//! (outside), discretized in time with trapezoidal-rule convolution
//! quadrature.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: conforming triangulations and their inherited boundary partition.
//! - [`fem`]: mass, stiffness and coupling matrices, loads, elliptic projection.
//! - [`bem`]: the Laplace-domain kernel, Galerkin blocks `V`, `K`, `W` and potentials.
//! - [`cq`]: convolution weights, discrete convolutions and their solvers.
//! - [`coupled`]: the fully discrete scheme, by marching and by reduction to the boundary.
//! - [`scenarios`]: incident waves, the manufactured test case and convergence studies.

pub mod bem;
pub mod coupled;
pub mod cq;
mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod parallel;
pub mod quadrature;
pub mod scenarios;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// A point in the plane.
pub type Point = [f64; 2];
