use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::ScfResult;
use crate::error::{Error, Result};
use crate::molint::{AoIntegralSet, EriTensor};

/// Largest spin-orbital count representable by a determinant bitstring.
pub const MAX_SPIN_ORBITALS: usize = 64;

/// Electronic Hamiltonian in an orthonormal spatial-orbital basis, expanded
/// to spin orbitals (spatial `p` → α `2p`, β `2p+1`).
///
/// `v` holds antisymmetrized physicist integrals `<pq||rs>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoHamiltonian {
    n_spatial: usize,
    n_electrons: usize,
    core_energy: f64,
    h_spatial: DMatrix<f64>,
    eri_spatial: EriTensor,
    h: Vec<f64>,
    v: Vec<f64>,
}

impl MoHamiltonian {
    /// Build from spatial one-electron integrals `h[p,q]` and chemist-notation
    /// two-electron integrals `(pq|rs)`. The reference is closed shell, so
    /// `n_electrons` must be even.
    pub fn from_spatial(
        h_spatial: DMatrix<f64>,
        eri_spatial: EriTensor,
        core_energy: f64,
        n_electrons: usize,
    ) -> Result<Self> {
        let n = h_spatial.nrows();
        if h_spatial.ncols() != n || eri_spatial.dim() != n {
            return Err(Error::invalid(format!(
                "integral dimensions disagree: h is {}x{}, eri has {} orbitals",
                h_spatial.nrows(),
                h_spatial.ncols(),
                eri_spatial.dim()
            )));
        }
        if 2 * n > MAX_SPIN_ORBITALS {
            return Err(Error::Unsupported(format!(
                "{n} spatial orbitals exceed the {MAX_SPIN_ORBITALS}-spin-orbital limit"
            )));
        }
        if n_electrons % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "odd electron count {n_electrons}; only closed-shell references are supported"
            )));
        }
        if n_electrons > 2 * n {
            return Err(Error::invalid(format!(
                "{n_electrons} electrons do not fit in {n} spatial orbitals"
            )));
        }
        if (&h_spatial - h_spatial.transpose()).amax() > 1e-10 {
            return Err(Error::invalid("one-electron integrals are not symmetric"));
        }

        let nso = 2 * n;
        let mut h = vec![0.0; nso * nso];
        for p in 0..nso {
            for q in 0..nso {
                if p % 2 == q % 2 {
                    h[p * nso + q] = h_spatial[(p / 2, q / 2)];
                }
            }
        }
        // <PQ|RS> = (pr|qs) δ(σP,σR) δ(σQ,σS)
        let coulomb = |p: usize, q: usize, r: usize, s: usize| -> f64 {
            if p % 2 == r % 2 && q % 2 == s % 2 {
                eri_spatial.get(p / 2, r / 2, q / 2, s / 2)
            } else {
                0.0
            }
        };
        let mut v = vec![0.0; nso * nso * nso * nso];
        for p in 0..nso {
            for q in 0..nso {
                for r in 0..nso {
                    for s in 0..nso {
                        v[((p * nso + q) * nso + r) * nso + s] =
                            coulomb(p, q, r, s) - coulomb(p, q, s, r);
                    }
                }
            }
        }
        Ok(Self {
            n_spatial: n,
            n_electrons,
            core_energy,
            h_spatial,
            eri_spatial,
            h,
            v,
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    /// Doubly occupied spatial orbitals in the reference determinant.
    pub fn n_occupied(&self) -> usize {
        self.n_electrons / 2
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn h_spatial(&self) -> &DMatrix<f64> {
        &self.h_spatial
    }

    pub fn eri_spatial(&self) -> &EriTensor {
        &self.eri_spatial
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * 2 * self.n_spatial + q]
    }

    /// `<pq||rs>`.
    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = 2 * self.n_spatial;
        self.v[((p * n + q) * n + r) * n + s]
    }

    /// Closed-shell Fock matrix of the reference determinant in the spatial basis.
    pub fn fock_spatial(&self) -> DMatrix<f64> {
        let n = self.n_spatial;
        let occ = self.n_occupied();
        let eri = &self.eri_spatial;
        DMatrix::from_fn(n, n, |p, q| {
            self.h_spatial[(p, q)]
                + (0..occ)
                    .map(|i| 2.0 * eri.get(p, q, i, i) - eri.get(p, i, i, q))
                    .sum::<f64>()
        })
    }

    /// Diagonal of the reference Fock matrix; canonical orbital energies when
    /// the orbitals come from a converged SCF.
    pub fn orbital_energies(&self) -> Vec<f64> {
        let f = self.fock_spatial();
        (0..self.n_spatial).map(|p| f[(p, p)]).collect()
    }

    /// `<Φ|H|Φ>` for the closed-shell reference.
    pub fn reference_energy(&self) -> f64 {
        let occ = self.n_occupied();
        let eri = &self.eri_spatial;
        let mut e = self.core_energy;
        for i in 0..occ {
            e += 2.0 * self.h_spatial[(i, i)];
            for j in 0..occ {
                e += 2.0 * eri.get(i, i, j, j) - eri.get(i, j, j, i);
            }
        }
        e
    }
}

/// Four-index transformation of the AO integrals into the SCF orbital basis.
pub fn mo_transform(ao: &AoIntegralSet, scf: &ScfResult) -> Result<MoHamiltonian> {
    let c = &scf.mo_coefficients;
    if c.nrows() != ao.n_ao {
        return Err(Error::invalid(format!(
            "MO coefficients have {} rows but the AO basis has {} functions",
            c.nrows(),
            ao.n_ao
        )));
    }
    if !scf.converged {
        return Err(Error::invalid("SCF result is not converged"));
    }
    let n_ao = ao.n_ao;
    let n = c.ncols();
    if n != n_ao {
        return Err(Error::invalid("MO coefficient matrix must be square"));
    }
    let h = c.transpose() * ao.core_hamiltonian() * c;
    let h = (&h + h.transpose()) * 0.5;

    // quarter transforms over dense n^4 buffers
    let idx = |a: usize, b: usize, cc: usize, d: usize, m: usize| ((a * m + b) * m + cc) * m + d;
    let m = n_ao.max(n);
    let mut full = vec![0.0; m * m * m * m];
    for a in 0..n_ao {
        for b in 0..n_ao {
            for cc in 0..n_ao {
                for d in 0..n_ao {
                    full[idx(a, b, cc, d, m)] = ao.eri.get(a, b, cc, d);
                }
            }
        }
    }
    let mut tmp = vec![0.0; m * m * m * m];
    // (a b c d) -> (b c d p) with p = Σ_a C[a,p]; four passes restore index order
    for _ in 0..4 {
        tmp.iter_mut().for_each(|x| *x = 0.0);
        for p in 0..n {
            for a in 0..n_ao {
                let coef = c[(a, p)];
                if coef == 0.0 {
                    continue;
                }
                for b in 0..m {
                    for cc in 0..m {
                        for d in 0..m {
                            tmp[idx(b, cc, d, p, m)] += coef * full[idx(a, b, cc, d, m)];
                        }
                    }
                }
            }
        }
        core::mem::swap(&mut full, &mut tmp);
    }
    let eri = EriTensor::from_fn(n, |p, q, r, s| full[idx(p, q, r, s, m)]);

    MoHamiltonian::from_spatial(h, eri, ao.e_nuc, scf.n_electrons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::rhf_solve;
    use crate::molint::{build_ao_integrals, chain_geometry, sto3g_hydrogen};

    fn system(n: usize, r: f64) -> (ScfResult, MoHamiltonian) {
        let g = chain_geometry(n, r).unwrap();
        let ao = build_ao_integrals(&g, &sto3g_hydrogen().basis_for(&g).unwrap()).unwrap();
        let scf = rhf_solve(&ao, n).unwrap();
        let h = mo_transform(&ao, &scf).unwrap();
        (scf, h)
    }

    #[test]
    fn h2_mo_integrals_match_reference_program() {
        let (_, h) = system(2, 1.4);
        assert!((h.h_spatial()[(0, 0)] + 1.252797061835817).abs() < 1e-10);
        assert!((h.h_spatial()[(1, 1)] + 0.4756022993742506).abs() < 1e-10);
        assert!(h.h_spatial()[(0, 1)].abs() < 1e-10);
        let e = h.eri_spatial();
        assert!((e.get(0, 0, 0, 0) - 0.674594084323369).abs() < 1e-10);
        assert!((e.get(1, 1, 1, 1) - 0.697495346680182).abs() < 1e-10);
        assert!((e.get(0, 0, 1, 1) - 0.663563991220548).abs() < 1e-10);
        assert!((e.get(0, 1, 0, 1) - 0.181257914793108).abs() < 1e-10);
    }

    #[test]
    fn reference_energy_is_hf_energy() {
        let (scf, h) = system(6, 2.0);
        assert!((h.reference_energy() - scf.e_hf).abs() < 1e-10);
    }

    #[test]
    fn fock_is_diagonal_in_canonical_orbitals() {
        let (scf, h) = system(6, 2.0);
        let f = h.fock_spatial();
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(scf.orbital_energies.clone()));
        assert!((f - diag).amax() < 1e-8);
    }

    #[test]
    fn spin_orbital_symmetries() {
        let (_, h) = system(4, 2.0);
        let n = h.n_spin_orbitals();
        for p in 0..n {
            for q in 0..n {
                assert!((h.h(p, q) - h.h(q, p)).abs() < 1e-12);
                if p % 2 != q % 2 {
                    assert_eq!(h.h(p, q), 0.0);
                }
                for r in 0..n {
                    for s in 0..n {
                        let x = h.v(p, q, r, s);
                        assert!((x + h.v(q, p, r, s)).abs() < 1e-12);
                        assert!((x + h.v(p, q, s, r)).abs() < 1e-12);
                        assert!((x - h.v(r, s, p, q)).abs() < 1e-12);
                        if (p % 2 + q % 2) != (r % 2 + s % 2) {
                            assert_eq!(x, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn odd_electrons_rejected() {
        let h = DMatrix::zeros(2, 2);
        let e = EriTensor::zeros(2);
        assert!(matches!(
            MoHamiltonian::from_spatial(h, e, 0.0, 1),
            Err(Error::Unsupported(_))
        ));
    }
}
