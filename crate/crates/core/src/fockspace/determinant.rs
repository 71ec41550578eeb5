use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::hamiltonian::MoHamiltonian;

pub const ALPHA_MASK: u64 = 0x5555_5555_5555_5555;
pub const BETA_MASK: u64 = 0xAAAA_AAAA_AAAA_AAAA;

/// Occupation bitset over spin orbitals; bit `2p` is spatial orbital `p`
/// with α spin, bit `2p+1` the β partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Determinant(pub u64);

impl Determinant {
    pub const EMPTY: Determinant = Determinant(0);

    pub fn from_orbitals(orbitals: impl IntoIterator<Item = usize>) -> Self {
        Determinant(orbitals.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    /// Closed-shell-style reference: the lowest `n_alpha` α and `n_beta` β
    /// spin orbitals filled.
    pub fn reference(n_alpha: usize, n_beta: usize) -> Self {
        Determinant::from_orbitals((0..n_alpha).map(|p| 2 * p).chain((0..n_beta).map(|p| 2 * p + 1)))
    }

    pub fn closed_shell(h: &MoHamiltonian) -> Self {
        Self::reference(h.n_occupied(), h.n_occupied())
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_occupied(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn n_alpha(self) -> u32 {
        (self.0 & ALPHA_MASK).count_ones()
    }

    #[inline]
    pub fn n_beta(self) -> u32 {
        (self.0 & BETA_MASK).count_ones()
    }

    pub fn orbitals(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            (bits != 0).then(|| {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                i
            })
        })
    }

    /// `(-1)^(number of occupied spin orbitals below i)`.
    #[inline]
    pub(crate) fn phase_below(self, i: usize) -> f64 {
        if (self.0 & ((1u64 << i) - 1)).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    pub(crate) fn create_unchecked(self, i: usize) -> Option<(Determinant, f64)> {
        (!self.is_occupied(i)).then(|| (Determinant(self.0 | 1u64 << i), self.phase_below(i)))
    }

    #[inline]
    pub(crate) fn annihilate_unchecked(self, i: usize) -> Option<(Determinant, f64)> {
        self.is_occupied(i).then(|| (Determinant(self.0 & !(1u64 << i)), self.phase_below(i)))
    }

    /// `a†_i |self>`; `None` when the orbital is already filled.
    pub fn create(self, i: usize) -> Result<Option<(Determinant, f64)>> {
        check_index(i)?;
        Ok(self.create_unchecked(i))
    }

    /// `a_i |self>`; `None` when the orbital is empty.
    pub fn annihilate(self, i: usize) -> Result<Option<(Determinant, f64)>> {
        check_index(i)?;
        Ok(self.annihilate_unchecked(i))
    }

    /// Occupations as '0'/'1' characters, spin orbital 0 first.
    pub fn to_bitstring(self, n_spin_orbitals: usize) -> String {
        (0..n_spin_orbitals)
            .map(|i| if self.is_occupied(i) { '1' } else { '0' })
            .collect()
    }
}

fn check_index(i: usize) -> Result<()> {
    if i >= 64 {
        Err(Error::invalid(format!("spin-orbital index {i} out of range")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creation_on_vacuum() {
        let (d, s) = Determinant::EMPTY.create(0).unwrap().unwrap();
        assert_eq!(d, Determinant(1));
        assert_eq!(s, 1.0);
    }

    #[test]
    fn pauli_exclusion() {
        assert!(Determinant(1).create(0).unwrap().is_none());
        assert!(Determinant(0).annihilate(3).unwrap().is_none());
    }

    #[test]
    fn annihilation_phase() {
        let (d, s) = Determinant(0b11).annihilate(1).unwrap().unwrap();
        assert_eq!(d, Determinant(0b01));
        assert_eq!(s, -1.0);
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(Determinant(0).create(64), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spin_counts_and_reference() {
        let r = Determinant::reference(2, 1);
        assert_eq!(r.bits(), 0b0111);
        assert_eq!(r.n_alpha(), 2);
        assert_eq!(r.n_beta(), 1);
        assert_eq!(r.orbitals().collect::<alloc::vec::Vec<_>>(), [0, 1, 2]);
        assert_eq!(r.to_bitstring(6), "111000");
    }

    #[test]
    fn anticommutation() {
        // a†_i a†_j = - a†_j a†_i on every small determinant
        for bits in 0u64..64 {
            let d = Determinant(bits);
            for i in 0..6 {
                for j in 0..6 {
                    let ij = d
                        .create_unchecked(j)
                        .and_then(|(d1, s1)| d1.create_unchecked(i).map(|(d2, s2)| (d2, s1 * s2)));
                    let ji = d
                        .create_unchecked(i)
                        .and_then(|(d1, s1)| d1.create_unchecked(j).map(|(d2, s2)| (d2, s1 * s2)));
                    match (ij, ji) {
                        (Some((a, sa)), Some((b, sb))) => {
                            assert_eq!(a, b);
                            assert_eq!(sa, -sb);
                        }
                        (None, None) => {}
                        _ => panic!("asymmetric Pauli blocking"),
                    }
                }
            }
        }
    }
}
