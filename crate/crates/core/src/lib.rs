//! Numerical core of a hybrid optical/microwave Rydberg CZ gate simulator.
//!
//! The optical qubit is a single photon stored and retrieved in an EIT
//! medium; the microwave qubit is a Schrödinger cat state reflected from a
//! cavity that holds either zero or one Rydberg excitation. This crate
//! computes the spectral transfer functions of both stages, the cat-state
//! algebra needed to trace out their environments, and the resulting gate
//! fidelities.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel sweeps live in the `hybridgate-sim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cat;
pub mod cqed;
pub mod eit;
mod error;
pub mod fidelity;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

pub use num_complex::Complex64;
