//! Biased quantum Rabi model: a flux qubit coupled to an LC oscillator.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! * [`model`]: truncated Hamiltonian, dense symmetric diagonalization,
//!   adaptive Fock cutoff, transition frequencies and drive matrix elements.
//! * [`analytic`]: associated Laguerre polynomials, displaced Fock overlaps,
//!   small-gap splitting formulas and the numerically located regime
//!   boundaries.
//! * [`response`]: thermal multi-level reflection/transmission spectra.
//! * [`regimes`]: peak/dip feature extraction and the five- and nine-pattern
//!   coupling-regime classifications.
//! * [`fit`]: flux calibration, coupler critical current and simplex fitting
//!   of `(delta, omega, g)` to resonance frequencies.
//!
//! All frequencies share one caller-chosen unit with `hbar = 1`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod eigen;
mod error;
pub mod fit;
pub mod model;
pub mod regimes;
pub mod response;

pub use error::Error;
pub use model::{EigenSystem, ModelParams, TruncationConfig};

pub type Result<T, E = Error> = core::result::Result<T, E>;
