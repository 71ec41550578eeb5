use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Determinant;
use crate::error::{Error, Result};
use crate::hamiltonian::MoHamiltonian;
use crate::linalg;

/// Identifies a fixed-(Nα, Nβ) sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorKey {
    pub n_spatial: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

/// All determinants with fixed α and β electron counts, sorted by bitstring
/// value. The closed-shell reference is therefore always at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    key: SectorKey,
    dets: Vec<Determinant>,
}

fn spin_strings(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while x < limit {
        out.push(x);
        // Gosper's hack: next integer with the same popcount
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Spread the bits of a spatial string onto even (α) positions.
fn spread(mut s: u64) -> u64 {
    let mut out = 0;
    let mut p = 0;
    while s != 0 {
        if s & 1 == 1 {
            out |= 1u64 << (2 * p);
        }
        s >>= 1;
        p += 1;
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl SectorBasis {
    pub fn new(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if 2 * n_spatial > 64 {
            return Err(Error::Unsupported(format!(
                "{n_spatial} spatial orbitals exceed the 64-spin-orbital bitstring"
            )));
        }
        if n_alpha > n_spatial || n_beta > n_spatial {
            return Err(Error::invalid(format!(
                "({n_alpha}, {n_beta}) electrons do not fit in {n_spatial} orbitals"
            )));
        }
        let alphas: Vec<u64> = spin_strings(n_spatial, n_alpha).into_iter().map(spread).collect();
        let betas: Vec<u64> = spin_strings(n_spatial, n_beta)
            .into_iter()
            .map(|b| spread(b) << 1)
            .collect();
        let mut dets: Vec<Determinant> = alphas
            .iter()
            .flat_map(|a| betas.iter().map(move |b| Determinant(a | b)))
            .collect();
        dets.sort_unstable();
        Ok(Self {
            key: SectorKey {
                n_spatial,
                n_alpha,
                n_beta,
            },
            dets,
        })
    }

    /// The Sz = 0 sector of a closed-shell Hamiltonian.
    pub fn for_hamiltonian(h: &MoHamiltonian) -> Result<Self> {
        Self::new(h.n_spatial(), h.n_occupied(), h.n_occupied())
    }

    /// Sector size `C(n, Nα) · C(n, Nβ)` without enumerating it.
    pub fn dimension_of(n_spatial: usize, n_alpha: usize, n_beta: usize) -> usize {
        binomial(n_spatial, n_alpha) * binomial(n_spatial, n_beta)
    }

    pub fn key(&self) -> SectorKey {
        self.key
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn index_of(&self, d: Determinant) -> Option<usize> {
        self.dets.binary_search(&d).ok()
    }

    pub fn reference(&self) -> Determinant {
        Determinant::reference(self.key.n_alpha, self.key.n_beta)
    }
}

/// Dense coefficient vector over a sector.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector {
    pub sector: SectorKey,
    pub coefficients: Vec<f64>,
}

impl WaveVector {
    pub fn zeros(basis: &SectorBasis) -> Self {
        Self {
            sector: basis.key(),
            coefficients: vec![0.0; basis.len()],
        }
    }

    pub fn basis_state(basis: &SectorBasis, d: Determinant) -> Result<Self> {
        let idx = basis
            .index_of(d)
            .ok_or_else(|| Error::invalid("determinant is not in the sector"))?;
        let mut v = Self::zeros(basis);
        v.coefficients[idx] = 1.0;
        Ok(v)
    }

    pub fn reference(basis: &SectorBasis) -> Self {
        Self::basis_state(basis, basis.reference()).expect("reference belongs to its sector")
    }

    pub fn from_coefficients(basis: &SectorBasis, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::invalid(format!(
                "vector length {} does not match sector dimension {}",
                coefficients.len(),
                basis.len()
            )));
        }
        Ok(Self {
            sector: basis.key(),
            coefficients,
        })
    }

    pub(crate) fn check(&self, basis: &SectorBasis) -> Result<()> {
        if self.sector != basis.key() || self.coefficients.len() != basis.len() {
            return Err(Error::invalid("wave vector belongs to a different sector"));
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coefficients)
    }

    pub fn dot(&self, other: &WaveVector) -> Result<f64> {
        if self.sector != other.sector {
            return Err(Error::invalid("inner product across sectors"));
        }
        Ok(linalg::dot(&self.coefficients, &other.coefficients))
    }

    /// Coefficient of the reference determinant (index 0).
    pub fn reference_component(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_ordering() {
        let b = SectorBasis::new(8, 4, 4).unwrap();
        assert_eq!(b.len(), 4900);
        assert_eq!(SectorBasis::dimension_of(8, 4, 4), 4900);
        assert!(b.dets().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.dets()[0], b.reference());
        assert!(b.dets().iter().all(|d| d.n_alpha() == 4 && d.n_beta() == 4));
        for (i, d) in b.dets().iter().enumerate().step_by(97) {
            assert_eq!(b.index_of(*d), Some(i));
        }
    }

    #[test]
    fn edge_sectors() {
        assert_eq!(SectorBasis::new(3, 0, 0).unwrap().len(), 1);
        assert_eq!(SectorBasis::new(3, 3, 1).unwrap().len(), 3);
        assert!(SectorBasis::new(2, 3, 0).is_err());
        assert!(SectorBasis::new(33, 1, 1).is_err());
    }

    #[test]
    fn vector_checks() {
        let b = SectorBasis::new(3, 1, 1).unwrap();
        let other = SectorBasis::new(3, 2, 1).unwrap();
        let v = WaveVector::reference(&b);
        assert_eq!(v.reference_component(), 1.0);
        assert!(v.check(&other).is_err());
        assert!(WaveVector::from_coefficients(&b, vec![0.0; 3]).is_err());
    }
}
