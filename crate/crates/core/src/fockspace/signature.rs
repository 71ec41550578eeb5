use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::{Determinant, ALPHA_MASK};
use crate::error::{Error, Result};

/// Label of a particle-conserving excitation `E_k`: the spin orbitals it
/// empties and the ones it fills.
///
/// `E_k` is the normal-ordered string `a†_c… a_i…` multiplied by the sign it
/// produces on the reference, so that `E_k|Φ> = +|Φ_k>` for the reference
/// it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExcitationSignature {
    annihilated: u64,
    created: u64,
    /// Sign that makes the string act with `+1` on its reference.
    sign: i8,
}

impl ExcitationSignature {
    /// Excitation of `reference` into `target`. Both must hold the same
    /// number of electrons.
    pub fn between(reference: Determinant, target: Determinant) -> Result<Self> {
        if reference.count() != target.count() {
            return Err(Error::invalid("determinants differ in particle number"));
        }
        let annihilated = reference.bits() & !target.bits();
        let created = target.bits() & !reference.bits();
        Ok(Self::with_reference(annihilated, created, reference))
    }

    /// Build from explicit index lists, fixing the phase against `reference`.
    pub fn new(annihilated: &[usize], created: &[usize], reference: Determinant) -> Result<Self> {
        let a = Determinant::from_orbitals(annihilated.iter().copied()).bits();
        let c = Determinant::from_orbitals(created.iter().copied()).bits();
        if annihilated.iter().chain(created).any(|&i| i >= 64) {
            return Err(Error::invalid("spin-orbital index out of range"));
        }
        if a.count_ones() as usize != annihilated.len() || c.count_ones() as usize != created.len() {
            return Err(Error::invalid("repeated spin-orbital index in excitation"));
        }
        if a.count_ones() != c.count_ones() {
            return Err(Error::invalid("excitation does not conserve particle number"));
        }
        if a & c != 0 {
            return Err(Error::invalid("annihilated and created orbitals overlap"));
        }
        if reference.bits() & a != a || reference.bits() & c != 0 {
            return Err(Error::invalid(format!(
                "excitation {annihilated:?} -> {created:?} does not act on the reference"
            )));
        }
        Ok(Self::with_reference(a, c, reference))
    }

    fn with_reference(annihilated: u64, created: u64, reference: Determinant) -> Self {
        let mut s = Self {
            annihilated,
            created,
            sign: 1,
        };
        let (_, phase) = s
            .raw_action(reference)
            .expect("signature must act on its reference");
        s.sign = if phase < 0.0 { -1 } else { 1 };
        s
    }

    pub fn annihilated_mask(&self) -> u64 {
        self.annihilated
    }

    pub fn created_mask(&self) -> u64 {
        self.created
    }

    pub fn annihilated(&self) -> Vec<usize> {
        Determinant(self.annihilated).orbitals().collect()
    }

    pub fn created(&self) -> Vec<usize> {
        Determinant(self.created).orbitals().collect()
    }

    pub fn rank(&self) -> usize {
        self.annihilated.count_ones() as usize
    }

    /// All spin orbitals touched by the excitation.
    pub fn support(&self) -> u64 {
        self.annihilated | self.created
    }

    pub fn conserves_sz(&self) -> bool {
        (self.annihilated & ALPHA_MASK).count_ones() == (self.created & ALPHA_MASK).count_ones()
    }

    /// Bare operator string: annihilations in ascending order, then creations
    /// in descending order, with Jordan-Wigner phases.
    #[inline]
    fn raw_action(&self, d: Determinant) -> Option<(Determinant, f64)> {
        if d.bits() & self.annihilated != self.annihilated || d.bits() & self.created != 0 {
            return None;
        }
        let mut cur = d;
        let mut phase = 1.0;
        for i in Determinant(self.annihilated).orbitals() {
            phase *= cur.phase_below(i);
            cur = Determinant(cur.bits() & !(1u64 << i));
        }
        let mut c = self.created;
        while c != 0 {
            let a = 63 - c.leading_zeros() as usize;
            c &= !(1u64 << a);
            phase *= cur.phase_below(a);
            cur = Determinant(cur.bits() | 1u64 << a);
        }
        Some((cur, phase))
    }

    /// `E_k |d>`.
    #[inline]
    pub fn excite(&self, d: Determinant) -> Option<(Determinant, f64)> {
        self.raw_action(d)
            .map(|(t, p)| (t, p * f64::from(self.sign)))
    }

    /// `E_k† |d>`.
    #[inline]
    pub fn deexcite(&self, d: Determinant) -> Option<(Determinant, f64)> {
        if d.bits() & self.created != self.created || d.bits() & self.annihilated != 0 {
            return None;
        }
        let source = Determinant(d.bits() ^ self.created ^ self.annihilated);
        // <source|E†|d> = <d|E|source>
        self.excite(source).map(|(_, p)| (source, p))
    }

    /// Whether every touched spin orbital lies in `mask`.
    pub fn within(&self, mask: u64) -> bool {
        self.support() & !mask == 0
    }
}

impl Ord for ExcitationSignature {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then(self.annihilated.cmp(&other.annihilated))
            .then(self.created.cmp(&other.created))
    }
}

impl PartialOrd for ExcitationSignature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `annihilated -> created`, space-separated spin-orbital indices.
impl fmt::Display for ExcitationSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |mask: u64, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            for (k, i) in Determinant(mask).orbitals().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{i}")?;
            }
            Ok(())
        };
        join(self.annihilated, f)?;
        f.write_str(" -> ")?;
        join(self.created, f)
    }
}
