//! Spectral analysis of periodic approximations to one-dimensional ergodic
//! Schrödinger operators H = Δ + V on ℓ²(Z): band catalogs with certified
//! edges, Floquet eigenpairs, Lyapunov-exponent estimators, finite-volume
//! Green functions with resonance diagnostics, localization profiles and
//! the Monte Carlo experiment drivers that tie them together.
//!
//! The numerical core works at caller-chosen MPFR precision because band
//! widths decay like e^{-γq}; see [`mp::required_bits`] for the sizing
//! heuristic.

pub mod error;
pub mod mp;
pub mod potential;
pub mod floquet;
pub mod transfer;

pub use error::{FloqError, Result};
