//! Recovery of exponential polynomials from samples on predetermined integer
//! lattice sets, and identification of polygonal regions in the unit square
//! from samples of the Fourier transform of their indicator functions.
//!
//! The crate is organized around the stages of that pipeline:
//!
//! - [`expoly`] — exponential polynomials `Σ p_j(ξ,η)·e^{2πi(x_jξ+y_jη)}`
//!   with polynomial coefficients and torus frequencies, plus their algebra.
//! - [`sampling`] — the lattice sampling sets on which such functions are
//!   determined by their values, and sampled-value containers.
//! - [`prony1d`] — univariate recovery: minimal linear recurrence
//!   (annihilating filter), unit-circle root extraction with multiplicities,
//!   and confluent Vandermonde coefficient solves.
//! - [`recover2d`] — bivariate recovery: plain polynomial grid interpolation,
//!   one-variable-frequency recovery, the layered multiplicity-staged
//!   procedure, and search over multiplicity assignments.
//! - [`geometry`] — polygons, edge frames and slope sets, the vertex-sum
//!   closed form of the indicator Fourier transform, a triangulation-based
//!   oracle, denominator clearing, and axis-parallel reconnection.
//! - [`pipeline`] — end-to-end polygon identification, weighted sums of
//!   indicators, and uniqueness-verification harnesses.
//! - [`generators`] — seeded random polygons and exponential polynomials for
//!   campaigns and tests.
//!
//! All functions are pure and all values are immutable after construction, so
//! everything here is safe to call concurrently from multiple threads.

pub mod expoly;
pub mod generators;
pub mod geometry;
pub mod json;
mod linalg;
pub mod pipeline;
pub mod prony1d;
pub mod recover2d;
pub mod sampling;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
