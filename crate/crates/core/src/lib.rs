//! Coulomb gases on subsets of the complex plane under weakly confining
//! potentials.
//!
//! The crate is organized around the Gibbs density
//!
//! ```text
//! P_N(dx) ∝ ∏_{i<j} |x_i - x_j|^β ∏_i exp(-N V(x_i)) dx_i
//! ```
//!
//! and the stereographic compactification of `ℂ` onto the Riemann sphere of
//! radius 1/2 centered at `(0, 0, 1/2)`:
//!
//! - [`model`]: supports, potentials, gas models, configurations and discrete
//!   measures.
//! - [`geometry`]: the inverse stereographic projection, chordal metric,
//!   compactified potential and push-forwards.
//! - [`energy`]: weighted logarithmic kernels and energies on both sides of
//!   the projection.
//! - [`equilibrium`]: closed-form limit laws, a grid solver for the
//!   equilibrium measure, mode descent and Euler–Lagrange residuals.
//! - [`sampler`]: Metropolis chains and exact `β = 2` matrix-model samplers.
//! - [`analysis`]: goodness-of-fit statistics and rate-function gaps.
//! - [`verify`]: seeded identity suites.
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature is
//! enabled (the default); see [`Execution`].

pub mod analysis;
pub mod energy;
pub mod equilibrium;
mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod numerics;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::Execution;
