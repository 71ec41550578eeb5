//! Exact diagonalization in the full sector and in complete active spaces.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fockspace::{matrix_element, Determinant, SectorBasis, SectorHamiltonian, WaveVector};
use crate::hamiltonian::MoHamiltonian;
use crate::linalg::{davidson_lowest, fix_sign, lowest_eigenpair, norm, LinearOperator};
use crate::qflow::ActiveSpace;

/// All determinants generated by distributing the active electrons over an
/// active space with inactive occupations frozen at the reference.
/// Sorted ascending, so the reference sits at position 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CasBasis {
    space: ActiveSpace,
    dets: Vec<Determinant>,
}

fn choose(items: &[usize], k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let n = items.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u64, |m, &i| m | 1u64 << items[i]));
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl CasBasis {
    pub fn new(space: &ActiveSpace, n_spatial: usize, n_occupied: usize) -> Result<Self> {
        space.validate(n_spatial, n_occupied)?;
        let reference = Determinant::reference(n_occupied, n_occupied);
        let mask = space.spin_mask();
        let frozen = reference.bits() & !mask;
        let n_act = space.occupied.len();
        let orbitals: Vec<usize> = space.occupied.iter().chain(&space.virtuals).copied().collect();
        let alpha: Vec<usize> = orbitals.iter().map(|p| 2 * p).collect();
        let beta: Vec<usize> = orbitals.iter().map(|p| 2 * p + 1).collect();
        let a_strings = choose(&alpha, n_act);
        let b_strings = choose(&beta, n_act);
        let mut dets: Vec<Determinant> = a_strings
            .iter()
            .flat_map(|a| b_strings.iter().map(move |b| Determinant(frozen | a | b)))
            .collect();
        dets.sort_unstable();
        debug_assert_eq!(dets[0], reference);
        Ok(Self {
            space: space.clone(),
            dets,
        })
    }

    pub fn for_hamiltonian(h: &MoHamiltonian, space: &ActiveSpace) -> Result<Self> {
        Self::new(space, h.n_spatial(), h.n_occupied())
    }

    pub fn space(&self) -> &ActiveSpace {
        &self.space
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn index_of(&self, d: Determinant) -> Option<usize> {
        self.dets.binary_search(&d).ok()
    }

    pub fn reference(&self) -> Determinant {
        self.dets[0]
    }

    /// Position of every CAS determinant in a full sector basis.
    pub fn embedding(&self, sector: &SectorBasis) -> Result<Vec<usize>> {
        self.dets
            .iter()
            .map(|&d| {
                sector
                    .index_of(d)
                    .ok_or_else(|| Error::invalid("CAS determinant outside the sector"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagOptions {
    /// Largest sector dimension accepted at all.
    pub dimension_limit: usize,
    /// Sectors up to this size use a dense eigensolver; larger ones Davidson.
    pub dense_threshold: usize,
    pub max_iterations: usize,
}

impl Default for DiagOptions {
    fn default() -> Self {
        Self {
            dimension_limit: 20_000,
            dense_threshold: 1_000,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: WaveVector,
    /// `‖Hx - Ex‖` of the returned eigenvector.
    pub residual: f64,
}

pub fn exact_diag(h: &MoHamiltonian) -> Result<GroundState> {
    exact_diag_with(h, &DiagOptions::default())
}

pub fn exact_diag_with(h: &MoHamiltonian, opts: &DiagOptions) -> Result<GroundState> {
    let n = h.n_occupied();
    let dim = SectorBasis::dimension_of(h.n_spatial(), n, n);
    if dim > opts.dimension_limit {
        return Err(Error::ResourceLimit {
            dimension: dim,
            limit: opts.dimension_limit,
        });
    }
    let basis = SectorBasis::for_hamiltonian(h)?;
    let op = SectorHamiltonian::new(h, &basis)?;
    exact_diag_sector(&basis, &op, opts)
}

/// Ground state of a prebuilt sector Hamiltonian.
pub fn exact_diag_sector(
    basis: &SectorBasis,
    op: &SectorHamiltonian,
    opts: &DiagOptions,
) -> Result<GroundState> {
    let dim = basis.len();
    let (energy, mut x) = if dim <= opts.dense_threshold {
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for c in 0..dim {
            e[c] = 1.0;
            let col = op.apply(&e);
            e[c] = 0.0;
            for r in 0..dim {
                m[(r, c)] = col[r];
            }
        }
        lowest_eigenpair(&m, 0)
    } else {
        let mut guess = vec![0.0; dim];
        guess[0] = 1.0;
        let tol = 1e-10 * op.max_abs().max(1.0);
        davidson_lowest(op, op.diagonal(), &guess, tol, opts.max_iterations)?
    };
    let nx = norm(&x);
    x.iter_mut().for_each(|c| *c /= nx);
    fix_sign(&mut x, 0);
    let mut r = op.apply(&x);
    crate::linalg::axpy(-energy, &x, &mut r);
    Ok(GroundState {
        energy,
        residual: norm(&r),
        vector: WaveVector::from_coefficients(basis, x)?,
    })
}

/// Bare Hamiltonian projected onto the CAS determinants.
pub fn cas_hamiltonian(h: &MoHamiltonian, cas: &CasBasis) -> DMatrix<f64> {
    let n = cas.len();
    let dets = cas.dets();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let x = matrix_element(h, dets[i], dets[j]);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct CasGroundState {
    pub energy: f64,
    /// Coefficients over `CasBasis::dets`.
    pub coefficients: Vec<f64>,
}

pub fn cas_ed(h: &MoHamiltonian, cas: &CasBasis) -> Result<CasGroundState> {
    if cas.is_empty() {
        return Err(Error::invalid("empty CAS"));
    }
    let (energy, coefficients) = lowest_eigenpair(&cas_hamiltonian(h, cas), 0);
    Ok(CasGroundState {
        energy,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molint::EriTensor;

    fn two_site(t: f64, u: f64, eps: f64) -> MoHamiltonian {
        // orbital energies (eps, -eps) coupled by t, on-site-like repulsion u
        let h = DMatrix::from_row_slice(2, 2, &[-eps, t, t, eps]);
        let mut eri = EriTensor::zeros(2);
        eri.set(0, 0, 0, 0, u);
        eri.set(1, 1, 1, 1, u);
        MoHamiltonian::from_spatial(h, eri, 0.0, 2).unwrap()
    }

    #[test]
    fn cas_sizes_and_reference_first() {
        let space = ActiveSpace::new(alloc::vec![2, 3], alloc::vec![4, 5], 0);
        let cas = CasBasis::new(&space, 8, 4).unwrap();
        assert_eq!(cas.len(), 36);
        assert_eq!(cas.reference(), Determinant::reference(4, 4));
        assert!(cas.dets().iter().all(|d| d.n_alpha() == 4 && d.n_beta() == 4));
        // inactive occupied orbitals 0 and 1 always filled
        assert!(cas.dets().iter().all(|d| d.bits() & 0b1111 == 0b1111));
    }

    #[test]
    fn invalid_spaces() {
        assert!(CasBasis::new(&ActiveSpace::new(alloc::vec![], alloc::vec![], 0), 4, 2).is_err());
        assert!(CasBasis::new(&ActiveSpace::new(alloc::vec![2], alloc::vec![3], 0), 4, 2).is_err());
    }

    #[test]
    fn two_site_closed_form() {
        // Sz=0 sector of 2 electrons in 2 orbitals: 4 determinants; the
        // singlet block is 3x3 but with this Hamiltonian (no exchange-type
        // integrals) it reduces to closed-form roots that we check via the
        // characteristic polynomial of the dense matrix built by hand.
        let (t, u, eps) = (0.3, 0.8, 0.5);
        let h = two_site(t, u, eps);
        let gs = exact_diag(&h).unwrap();
        // singlet basis |00>, (|01>+|10>)/√2, |11> with energies
        // -2eps+u, 0, 2eps+u and couplings √2 t
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                -2.0 * eps + u,
                2f64.sqrt() * t,
                0.0,
                2f64.sqrt() * t,
                0.0,
                2f64.sqrt() * t,
                0.0,
                2f64.sqrt() * t,
                2.0 * eps + u,
            ],
        );
        let (oracle, _) = lowest_eigenpair(&a, 0);
        assert!((gs.energy - oracle).abs() < 1e-12);
        assert!(gs.residual < 1e-10);
        assert!(gs.vector.reference_component() >= 0.0);
    }

    #[test]
    fn core_energy_only() {
        let h = MoHamiltonian::from_spatial(DMatrix::zeros(2, 2), EriTensor::zeros(2), -1.25, 2).unwrap();
        assert_eq!(exact_diag(&h).unwrap().energy, -1.25);
    }

    #[test]
    fn dimension_limit() {
        let h = two_site(0.1, 0.2, 0.3);
        let opts = DiagOptions {
            dimension_limit: 3,
            ..DiagOptions::default()
        };
        assert!(matches!(exact_diag_with(&h, &opts), Err(Error::ResourceLimit { .. })));
    }
}
