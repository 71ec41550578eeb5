//! Hydrogen-chain electronic-structure workbench: s-type Gaussian integrals,
//! restricted Hartree-Fock, a determinant-space emulator, exact and CAS
//! diagonalization, rank-truncated coupled cluster, and the QFlow
//! active-space flow.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the command
//! line live in the `qflow` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ccbaseline;
pub mod error;
pub mod fockspace;
pub mod hamiltonian;
pub mod linalg;
pub mod molint;
pub mod qflow;
pub mod spectra;

pub use error::{Error, Result};
pub use nalgebra;
