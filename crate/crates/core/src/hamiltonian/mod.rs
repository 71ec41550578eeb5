//! Closed-shell Hartree-Fock and the spin-orbital molecular Hamiltonian built
//! from its canonical orbitals.

mod mo;
mod scf;

pub use mo::{mo_transform, MoHamiltonian};
pub use scf::{core_guess_orbital_energies, rhf_solve, rhf_solve_with, ScfIteration, ScfOptions, ScfResult};
