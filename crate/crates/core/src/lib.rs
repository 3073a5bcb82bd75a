//! Numerical core for Wick-ordered Gaussian multiplicative chaos.
//!
//! Everything here is deterministic and allocation-light: Hermite and Wick
//! calculus, seed covariances for almost star-scale invariant fields, a
//! layered spectral sampler on the periodic grid, regularised GMC-derivative
//! functionals with their moment oracles, and the multiscale good/bad event
//! bookkeeping. File formats, configuration and replica orchestration live in
//! the companion `gmc-lab` crate.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod events;
pub mod fft;
pub mod field;
pub mod gmc;
pub mod hermite;
pub mod kernels;
pub mod quadrature;
pub mod rng;
pub mod stats;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use num_complex::Complex64;
