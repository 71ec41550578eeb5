//! Occupation-number engine: determinant bitstrings with Jordan-Wigner
//! phases, fixed-particle sectors, Hamiltonian and generator actions, and
//! truncated-Taylor exponential actions.

mod determinant;
mod expm;
mod generator;
mod sector;
mod signature;
mod slater;

pub use determinant::{Determinant, ALPHA_MASK, BETA_MASK};
pub use expm::{expm_action, expm_apply, ExpmOptions, DEFAULT_EXPM_TOL, DEFAULT_MAX_TERMS};
pub use generator::{apply_generator, BoundGenerator, GeneratorMatrix};
pub use sector::{SectorBasis, SectorKey, WaveVector};
pub use signature::ExcitationSignature;
pub use slater::{apply_hamiltonian, matrix_element, SectorHamiltonian};
