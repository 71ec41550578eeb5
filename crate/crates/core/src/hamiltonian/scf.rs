use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{inverse_sqrt, symmetric_eigen, Diis};
use crate::molint::{AoIntegralSet, EriTensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    pub diis_depth: usize,
    pub density_tol: f64,
    pub energy_tol: f64,
    pub max_cycles: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            diis_depth: 8,
            density_tol: 1e-10,
            energy_tol: 1e-12,
            max_cycles: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfIteration {
    pub cycle: usize,
    pub energy: f64,
    pub density_rms: f64,
}

#[derive(Debug, Clone)]
pub struct ScfResult {
    /// AO × MO coefficients, columns ordered by ascending orbital energy.
    pub mo_coefficients: DMatrix<f64>,
    pub orbital_energies: Vec<f64>,
    /// Total energy including nuclear repulsion.
    pub e_hf: f64,
    pub n_electrons: usize,
    pub iterations: Vec<ScfIteration>,
    pub converged: bool,
}

impl ScfResult {
    pub fn n_occupied(&self) -> usize {
        self.n_electrons / 2
    }
}

fn two_electron(eri: &EriTensor, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    DMatrix::from_fn(n, n, |mu, nu| {
        let mut g = 0.0;
        for la in 0..n {
            for si in 0..n {
                g += d[(la, si)] * (eri.get(mu, nu, la, si) - 0.5 * eri.get(mu, la, nu, si));
            }
        }
        g
    })
}

fn density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    (&occ * occ.transpose()) * 2.0
}

fn electronic_energy(d: &DMatrix<f64>, hcore: &DMatrix<f64>, fock: &DMatrix<f64>) -> f64 {
    0.5 * d.component_mul(&(hcore + fock)).sum()
}

/// Make the largest-magnitude coefficient of every orbital positive. Among
/// near-equal magnitudes the lowest AO index decides.
fn fix_phases(c: &mut DMatrix<f64>) {
    for j in 0..c.ncols() {
        let amax = c.column(j).amax();
        let pivot = (0..c.nrows())
            .find(|&i| c[(i, j)].abs() >= amax - 1e-10)
            .unwrap_or(0);
        if c[(pivot, j)] < 0.0 {
            c.column_mut(j).neg_mut();
        }
    }
}

fn diagonalize(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let fprime = x.transpose() * fock * x;
    let (eps, cprime) = symmetric_eigen(&fprime);
    let mut c = x * cprime;
    fix_phases(&mut c);
    (eps, c)
}

/// Eigenvalues of the core Hamiltonian in the orthonormalized AO basis,
/// i.e. the orbital energies of the initial guess.
pub fn core_guess_orbital_energies(ao: &AoIntegralSet) -> Vec<f64> {
    let (x, _) = inverse_sqrt(&ao.overlap);
    diagonalize(&ao.core_hamiltonian(), &x).0
}

pub fn rhf_solve(ao: &AoIntegralSet, n_electrons: usize) -> Result<ScfResult> {
    rhf_solve_with(ao, n_electrons, &ScfOptions::default())
}

/// Restricted closed-shell SCF: core-Hamiltonian guess, symmetric
/// orthogonalization and DIIS on the commutator `FDS - SDF`.
pub fn rhf_solve_with(ao: &AoIntegralSet, n_electrons: usize, opts: &ScfOptions) -> Result<ScfResult> {
    if n_electrons % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "open-shell reference ({n_electrons} electrons); only closed-shell RHF is implemented"
        )));
    }
    let n_occ = n_electrons / 2;
    if n_occ > ao.n_ao {
        return Err(Error::invalid(format!(
            "{n_electrons} electrons do not fit in {} orbitals",
            ao.n_ao
        )));
    }
    let (x, _) = inverse_sqrt(&ao.overlap);
    let hcore = ao.core_hamiltonian();
    let s = &ao.overlap;

    let (_, c0) = diagonalize(&hcore, &x);
    let mut d = density(&c0, n_occ);
    let mut diis = Diis::new(opts.diis_depth);
    let mut trace = Vec::new();
    let mut e_prev = f64::NAN;
    let mut converged = false;
    let n = ao.n_ao;

    for cycle in 1..=opts.max_cycles {
        let fock = &hcore + two_electron(&ao.eri, &d);
        let energy = electronic_energy(&d, &hcore, &fock) + ao.e_nuc;
        let fds = &fock * &d * s;
        let err = x.transpose() * (&fds - fds.transpose()) * &x;
        let extrapolated = diis.extrapolate(
            fock.as_slice().to_vec(),
            err.as_slice().to_vec(),
        );
        let fock_use = DMatrix::from_column_slice(n, n, &extrapolated);
        let (_, c) = diagonalize(&fock_use, &x);
        let d_new = density(&c, n_occ);
        let density_rms = if n == 0 {
            0.0
        } else {
            libm::sqrt((&d_new - &d).norm_squared() / (n * n) as f64)
        };
        trace.push(ScfIteration {
            cycle,
            energy,
            density_rms,
        });
        let de = (energy - e_prev).abs();
        d = d_new;
        if density_rms < opts.density_tol && de < opts.energy_tol {
            converged = true;
            break;
        }
        e_prev = energy;
    }
    if !converged {
        return Err(Error::ScfNotConverged(Box::new(trace)));
    }

    let fock = &hcore + two_electron(&ao.eri, &d);
    let (orbital_energies, mo_coefficients) = diagonalize(&fock, &x);
    let d_final = density(&mo_coefficients, n_occ);
    let f_final = &hcore + two_electron(&ao.eri, &d_final);
    let e_hf = electronic_energy(&d_final, &hcore, &f_final) + ao.e_nuc;

    Ok(ScfResult {
        mo_coefficients,
        orbital_energies,
        e_hf,
        n_electrons,
        iterations: trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molint::{build_ao_integrals, chain_geometry, sto3g_hydrogen};

    fn chain(n: usize, r: f64) -> AoIntegralSet {
        let g = chain_geometry(n, r).unwrap();
        build_ao_integrals(&g, &sto3g_hydrogen().basis_for(&g).unwrap()).unwrap()
    }

    #[test]
    fn h2_reference_energy() {
        let scf = rhf_solve(&chain(2, 1.4), 2).unwrap();
        assert!((scf.e_hf + 1.11671432506255).abs() < 1e-10);
        assert!((scf.orbital_energies[0] + 0.578202977512448).abs() < 1e-9);
        assert!((scf.orbital_energies[1] - 0.670267768273737).abs() < 1e-9);
    }

    #[test]
    fn orthonormal_and_ascending() {
        let ao = chain(6, 2.0);
        let scf = rhf_solve(&ao, 6).unwrap();
        let ctsc = scf.mo_coefficients.transpose() * &ao.overlap * &scf.mo_coefficients;
        assert!((ctsc - DMatrix::identity(6, 6)).amax() < 1e-10);
        assert!(scf.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(scf.converged);
        assert!(scf.iterations.last().unwrap().density_rms < 1e-10);
        assert!(scf.iterations.last().unwrap().energy <= scf.iterations[0].energy);
    }

    #[test]
    fn phases_are_fixed() {
        let scf = rhf_solve(&chain(4, 2.0), 4).unwrap();
        for j in 0..4 {
            let col = scf.mo_coefficients.column(j);
            let amax = col.amax();
            let first = col.iter().find(|c| c.abs() >= amax - 1e-10).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn one_electron_core_guess() {
        let eps = core_guess_orbital_energies(&chain(1, 1.0));
        assert!((eps[0] + 0.466581849557275).abs() < 1e-10);
    }

    #[test]
    fn odd_and_oversized_rejected() {
        let ao = chain(3, 2.0);
        assert!(matches!(rhf_solve(&ao, 3), Err(Error::Unsupported(_))));
        assert!(matches!(rhf_solve(&ao, 8), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn non_convergence_carries_trace() {
        let opts = ScfOptions {
            max_cycles: 2,
            ..ScfOptions::default()
        };
        match rhf_solve_with(&chain(6, 3.0), 6, &opts) {
            Err(Error::ScfNotConverged(trace)) => assert_eq!(trace.len(), 2),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }
}
