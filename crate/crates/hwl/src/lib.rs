//! Numerical library for the variance structure of increments of
//! generalized Hermite-type limit processes over multidimensional
//! observation windows.
//!
//! The increment variance over an observation window `Δ` admits two
//! independent computation routes:
//!
//! * a position-space route through Riesz potential energies of annular
//!   shells `Δ((t+h)^{1/n}) \ Δ(t^{1/n})` ([`riesz`]),
//! * a frequency-space route through closed-form Fourier transforms of
//!   the shell indicators summed against the singular spectral weight
//!   `‖λ‖^{α−n}` ([`spectral`]).
//!
//! [`crofton`] verifies the mean value formula for the derivative of the
//! pair-distance average over growing shells, and [`fieldsim`] reproduces
//! the limit variances empirically from simulated long-range dependent
//! Gaussian fields.

pub mod analysis;
pub mod crofton;
pub mod error;
pub mod fieldsim;
pub mod geometry;
pub mod riesz;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
