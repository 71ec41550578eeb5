use alloc::format;
use alloc::vec::Vec;


use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub charge: u32,
    /// Cartesian position in bohr.
    pub position: [f64; 3],
}

/// A validated set of nuclei: positive charges, no two atoms at the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    atoms: Vec<Atom>,
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if a.charge == 0 {
                return Err(Error::invalid(format!("atom {i} has zero nuclear charge")));
            }
            if a.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("atom {i} has a non-finite position")));
            }
            for (j, b) in atoms.iter().enumerate().take(i) {
                if distance(&a.position, &b.position) == 0.0 {
                    return Err(Error::Singularity(j, i));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_charge(&self) -> u32 {
        self.atoms.iter().map(|a| a.charge).sum()
    }

    /// Rigidly shift every atom by `offset`.
    pub fn translated(&self, offset: [f64; 3]) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                charge: a.charge,
                position: [
                    a.position[0] + offset[0],
                    a.position[1] + offset[1],
                    a.position[2] + offset[2],
                ],
            })
            .collect();
        Self { atoms }
    }

    /// Apply a 3x3 rotation matrix (row-major) about the origin.
    pub fn rotated(&self, r: [[f64; 3]; 3]) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let p = a.position;
                let mut q = [0.0; 3];
                for (k, row) in r.iter().enumerate() {
                    q[k] = row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
                }
                Atom {
                    charge: a.charge,
                    position: q,
                }
            })
            .collect();
        Self { atoms }
    }
}

/// Equally spaced collinear hydrogen atoms along z, starting at the origin.
pub fn chain_geometry(n_atoms: usize, spacing: f64) -> Result<Geometry> {
    if n_atoms == 0 {
        return Err(Error::invalid("chain needs at least one atom"));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::invalid(format!("chain spacing must be positive, got {spacing}")));
    }
    let atoms = (0..n_atoms)
        .map(|k| Atom {
            charge: 1,
            position: [0.0, 0.0, k as f64 * spacing],
        })
        .collect();
    Geometry::new(atoms)
}

pub fn nuclear_repulsion(g: &Geometry) -> Result<f64> {
    let atoms = g.atoms();
    let mut e = 0.0;
    for i in 0..atoms.len() {
        for j in 0..i {
            let r = distance(&atoms[i].position, &atoms[j].position);
            if r == 0.0 {
                return Err(Error::Singularity(j, i));
            }
            e += f64::from(atoms[i].charge) * f64::from(atoms[j].charge) / r;
        }
    }
    Ok(e)
}
