//! Strongly convex principal component pursuit with reduced linear measurements.
//!
//! Recovers a low-rank matrix `L0` and a sparse matrix `S0` from `P_Q M`, the
//! projection of `M = L0 + S0` onto a subspace `Q` whose orthogonal complement
//! is a random `p`-dimensional subspace of `R^{n x n}`, by solving
//!
//! ```text
//! minimize   ||L||_* + lambda ||S||_1 + (1/2tau) ||L||_F^2 + (1/2tau) ||S||_F^2
//! subject to P_Q M = P_Q (L + S)
//! ```
//!
//! The crate is `no_std` and only needs an allocator. It contains:
//!
//! - [`linops`]: projectors onto supports, tangent spaces and measurement
//!   subspaces, proximal maps, conjugate gradients and operator norms.
//! - [`model`]: seeded instance generators, incoherence and the `tau`
//!   selection rules.
//! - [`solver`]: accelerated gradient ascent on the smooth dual.
//! - [`certificate`]: the dual certificate machinery (least-norm `W^Q`,
//!   certificate search, and empirical checks of the supporting bounds).
//!
//! File formats, the experiment harness and the command line live in the
//! `spcp` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certificate;
mod error;
pub mod linops;
pub mod model;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use linops::Mat;
