use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::ActiveSpace;
use crate::fockspace::{Determinant, ExcitationSignature};

/// Every Sz-conserving excitation of `reference` that touches only the
/// spin orbitals of `space`, sorted.
pub fn internal_signatures(space: &ActiveSpace, reference: Determinant) -> Vec<ExcitationSignature> {
    let mask = space.spin_mask();
    let holes = reference.bits() & mask;
    let particles = mask & !reference.bits();
    let mut out = Vec::new();
    // enumerate subsets of holes and particles with matching α and β counts
    let mut h = holes;
    loop {
        let mut p = particles;
        loop {
            let sz_ok = (h & crate::fockspace::ALPHA_MASK).count_ones()
                == (p & crate::fockspace::ALPHA_MASK).count_ones()
                && (h & crate::fockspace::BETA_MASK).count_ones()
                    == (p & crate::fockspace::BETA_MASK).count_ones();
            if h != 0 && sz_ok {
                let target = Determinant(reference.bits() ^ h ^ p);
                out.push(ExcitationSignature::between(reference, target).expect("same particle number"));
            }
            if p == 0 {
                break;
            }
            p = (p - 1) & particles;
        }
        if h == 0 {
            break;
        }
        h = (h - 1) & holes;
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEntry {
    pub value: f64,
    /// Ordinal of the first active space that contains the signature.
    pub owner: usize,
}

/// Global amplitude pool, sorted by signature.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePool {
    signatures: Vec<ExcitationSignature>,
    entries: Vec<PoolEntry>,
}

/// Union of the internal signatures of all spaces, zero-initialized.
pub fn build_pool(spaces: &[ActiveSpace], reference: Determinant) -> AmplitudePool {
    let mut all: Vec<(ExcitationSignature, usize)> = Vec::new();
    for s in spaces {
        all.extend(internal_signatures(s, reference).into_iter().map(|sig| (sig, s.ordinal)));
    }
    all.sort_unstable();
    all.dedup_by_key(|(sig, _)| *sig);
    let (signatures, entries) = all
        .into_iter()
        .map(|(sig, owner)| (sig, PoolEntry { value: 0.0, owner }))
        .unzip();
    AmplitudePool { signatures, entries }
}

/// Pool indices inside and outside one active space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub internal: Vec<usize>,
    pub external: Vec<usize>,
}

pub fn partition_pool(pool: &AmplitudePool, space: &ActiveSpace) -> Partition {
    let mask = space.spin_mask();
    let (internal, external) = (0..pool.len()).partition(|&k| pool.signatures[k].within(mask));
    Partition { internal, external }
}

impl AmplitudePool {
    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn signatures(&self) -> &[ExcitationSignature] {
        &self.signatures
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn set_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.len(), "pool length mismatch");
        for (e, &v) in self.entries.iter_mut().zip(values) {
            e.value = v;
        }
    }

    pub fn index_of(&self, sig: &ExcitationSignature) -> Option<usize> {
        self.signatures.binary_search(sig).ok()
    }

    pub fn get(&self, sig: &ExcitationSignature) -> Option<PoolEntry> {
        self.index_of(sig).map(|k| self.entries[k])
    }

    pub fn owned_by(&self, ordinal: usize) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.entries[k].owner == ordinal).collect()
    }

    /// Entry counts indexed by excitation rank.
    pub fn count_by_rank(&self) -> Vec<usize> {
        let max = self.signatures.iter().map(|s| s.rank()).max().unwrap_or(0);
        let mut counts = vec![0; max + 1];
        for s in &self.signatures {
            counts[s.rank()] += 1;
        }
        counts
    }

    /// `(signature, value)` pairs for a set of indices.
    pub fn slice(&self, indices: &[usize]) -> Vec<(ExcitationSignature, f64)> {
        indices
            .iter()
            .map(|&k| (self.signatures[k], self.entries[k].value))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExcitationSignature, &PoolEntry)> {
        self.signatures.iter().zip(&self.entries)
    }
}

/// One `annihilated -> created : value` line per entry.
impl fmt::Display for AmplitudePool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sig, e) in self.iter() {
            writeln!(f, "{sig} : {:.12e}", e.value)?;
        }
        Ok(())
    }
}
