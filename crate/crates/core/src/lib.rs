//! Gaussian simulation of a probe oscillator coupled to a network of
//! harmonic oscillators.
//!
//! Quadratures are ordered `x = (q_S, q_1..q_N, p_S, p_1..p_N)` with the
//! probe first, and the vacuum covariance is `I/2` (`hbar = 1`).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod netmodel;
pub mod probes;
pub mod seeds;
pub mod symplectic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
