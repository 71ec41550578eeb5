use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fockspace::Determinant;

/// An SES active space: chosen occupied and virtual spatial orbitals plus its
/// position in the flow ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveSpace {
    pub occupied: Vec<usize>,
    pub virtuals: Vec<usize>,
    pub ordinal: usize,
}

impl ActiveSpace {
    pub fn new(mut occupied: Vec<usize>, mut virtuals: Vec<usize>, ordinal: usize) -> Self {
        occupied.sort_unstable();
        occupied.dedup();
        virtuals.sort_unstable();
        virtuals.dedup();
        Self {
            occupied,
            virtuals,
            ordinal,
        }
    }

    /// Check against a reference with `n_occupied` doubly occupied orbitals
    /// out of `n_spatial`.
    pub fn validate(&self, n_spatial: usize, n_occupied: usize) -> Result<()> {
        if self.occupied.is_empty() && self.virtuals.is_empty() {
            return Err(Error::invalid("active space is empty"));
        }
        if let Some(&i) = self.occupied.iter().find(|&&i| i >= n_occupied) {
            return Err(Error::invalid(format!("active orbital {i} is not occupied in the reference")));
        }
        if let Some(&a) = self.virtuals.iter().find(|&&a| a < n_occupied || a >= n_spatial) {
            return Err(Error::invalid(format!("active orbital {a} is not a reference virtual")));
        }
        Ok(())
    }

    /// Spin-orbital mask of all active orbitals.
    pub fn spin_mask(&self) -> u64 {
        Determinant::from_orbitals(
            self.occupied
                .iter()
                .chain(&self.virtuals)
                .flat_map(|&p| [2 * p, 2 * p + 1]),
        )
        .bits()
    }

    /// Same orbitals, e.g. the full orbital set.
    pub fn full(n_spatial: usize, n_occupied: usize) -> Self {
        Self::new((0..n_occupied).collect(), (n_occupied..n_spatial).collect(), 0)
    }
}

impl core::fmt::Display for ActiveSpace {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "#{} occ {:?} virt {:?}", self.ordinal, self.occupied, self.virtuals)
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Key resolution: energy sums closer than this count as ties.
const ORDERING_RESOLUTION: f64 = 1e-8;

/// Every choice of `n_occ_act` reference-occupied and `n_virt_act` virtual
/// orbitals, sorted by `Σε_virt − Σε_occ` ascending with ties broken by the
/// orbital indices. Ordinals follow that order.
pub fn enumerate_active_spaces(
    orbital_energies: &[f64],
    n_occupied: usize,
    n_occ_act: usize,
    n_virt_act: usize,
) -> Result<Vec<ActiveSpace>> {
    let n = orbital_energies.len();
    if n_occupied > n {
        return Err(Error::invalid("more occupied orbitals than orbitals"));
    }
    if n_occ_act == 0 || n_virt_act == 0 {
        return Err(Error::invalid("active spaces need occupied and virtual orbitals"));
    }
    if n_occ_act > n_occupied || n_virt_act > n - n_occupied {
        return Err(Error::invalid(format!(
            "cannot pick ({n_occ_act} occ, {n_virt_act} virt) from ({n_occupied} occ, {} virt)",
            n - n_occupied
        )));
    }
    let occ: Vec<usize> = (0..n_occupied).collect();
    let virt: Vec<usize> = (n_occupied..n).collect();
    let mut keyed = Vec::new();
    for o in combinations(&occ, n_occ_act) {
        for v in combinations(&virt, n_virt_act) {
            let gap: f64 = v.iter().map(|&a| orbital_energies[a]).sum::<f64>()
                - o.iter().map(|&i| orbital_energies[i]).sum::<f64>();
            let key = libm::round(gap / ORDERING_RESOLUTION) as i64;
            keyed.push((key, o.clone(), v));
        }
    }
    keyed.sort();
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(ordinal, (_, o, v))| ActiveSpace::new(o, v, ordinal))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_primary_space() {
        let eps6 = [-0.6, -0.45, -0.3, 0.2, 0.35, 0.5];
        assert_eq!(enumerate_active_spaces(&eps6, 3, 2, 2).unwrap().len(), 9);
        let eps8 = [-0.7, -0.6, -0.45, -0.3, 0.2, 0.35, 0.5, 0.6];
        let spaces = enumerate_active_spaces(&eps8, 4, 2, 2).unwrap();
        assert_eq!(spaces.len(), 36);
        assert_eq!(spaces[0].occupied, [2, 3]);
        assert_eq!(spaces[0].virtuals, [4, 5]);
        assert!(spaces.iter().enumerate().all(|(i, s)| s.ordinal == i));
    }

    #[test]
    fn ties_break_on_indices() {
        let eps = [-1.0, -1.0, 1.0, 1.0];
        let spaces = enumerate_active_spaces(&eps, 2, 1, 1).unwrap();
        let pairs: Vec<(usize, usize)> = spaces.iter().map(|s| (s.occupied[0], s.virtuals[0])).collect();
        assert_eq!(pairs, [(0, 2), (0, 3), (1, 2), (1, 3)]);
    }

    #[test]
    fn too_few_orbitals() {
        assert!(enumerate_active_spaces(&[-1.0, 1.0], 1, 2, 1).is_err());
        assert!(enumerate_active_spaces(&[-1.0, 1.0], 1, 1, 2).is_err());
    }

    #[test]
    fn spin_mask_covers_both_spins() {
        let s = ActiveSpace::new(alloc::vec![1], alloc::vec![3], 0);
        assert_eq!(s.spin_mask(), 0b1100_1100);
    }
}
