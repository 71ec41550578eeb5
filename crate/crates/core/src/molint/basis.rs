use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::molint::Geometry;

/// One primitive of a contraction as published: exponent (bohr⁻²) and
/// contraction coefficient relative to a normalized primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub exponent: f64,
    pub coefficient: f64,
}

/// A normalized contracted s-type Gaussian centred on an atom.
///
/// Coefficients are stored against normalized primitives and rescaled so the
/// contracted function has unit self-overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedSGaussian {
    center: usize,
    primitives: Vec<Primitive>,
}

/// Overlap of two normalized s primitives on the same centre.
fn same_center_overlap(a: f64, b: f64) -> f64 {
    libm::pow(2.0 * libm::sqrt(a * b) / (a + b), 1.5)
}

impl ContractedSGaussian {
    pub fn new(center: usize, primitives: Vec<Primitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::invalid("contracted Gaussian needs at least one primitive"));
        }
        for p in &primitives {
            if !(p.exponent > 0.0) || !p.exponent.is_finite() || !p.coefficient.is_finite() {
                return Err(Error::invalid(format!(
                    "bad primitive (exponent {}, coefficient {})",
                    p.exponent, p.coefficient
                )));
            }
        }
        let mut s = 0.0;
        for p in &primitives {
            for q in &primitives {
                s += p.coefficient * q.coefficient * same_center_overlap(p.exponent, q.exponent);
            }
        }
        if !(s > 0.0) {
            return Err(Error::invalid("contraction has zero norm"));
        }
        let scale = 1.0 / libm::sqrt(s);
        let primitives = primitives
            .into_iter()
            .map(|p| Primitive {
                exponent: p.exponent,
                coefficient: p.coefficient * scale,
            })
            .collect();
        Ok(Self { center, primitives })
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn self_overlap(&self) -> f64 {
        let mut s = 0.0;
        for p in &self.primitives {
            for q in &self.primitives {
                s += p.coefficient * q.coefficient * same_center_overlap(p.exponent, q.exponent);
            }
        }
        s
    }
}

/// The s shells placed on every atom of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis {
    pub charge: u32,
    pub shells: Vec<Vec<Primitive>>,
}

/// Element-indexed collection of basis definitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisLibrary {
    elements: BTreeMap<u32, ElementBasis>,
}

impl BasisLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, element: ElementBasis) {
        self.elements.insert(element.charge, element);
    }

    pub fn get(&self, charge: u32) -> Option<&ElementBasis> {
        self.elements.get(&charge)
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementBasis> {
        self.elements.values()
    }

    /// Place the element shells on every atom, in atom order.
    pub fn basis_for(&self, geometry: &Geometry) -> Result<Vec<ContractedSGaussian>> {
        let mut out = Vec::new();
        for (i, atom) in geometry.atoms().iter().enumerate() {
            let element = self.get(atom.charge).ok_or_else(|| {
                Error::invalid(format!("no basis functions for nuclear charge {}", atom.charge))
            })?;
            for shell in &element.shells {
                out.push(ContractedSGaussian::new(i, shell.clone())?);
            }
        }
        Ok(out)
    }
}

/// Minimal STO-3G hydrogen basis (exponents for ζ = 1.24).
pub fn sto3g_hydrogen() -> BasisLibrary {
    let mut lib = BasisLibrary::new();
    lib.insert(ElementBasis {
        charge: 1,
        shells: vec![vec![
            Primitive {
                exponent: 3.42525091,
                coefficient: 0.15432897,
            },
            Primitive {
                exponent: 0.62391373,
                coefficient: 0.53532814,
            },
            Primitive {
                exponent: 0.16885540,
                coefficient: 0.44463454,
            },
        ]],
    });
    lib
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molint::chain_geometry;

    #[test]
    fn contraction_is_normalized() {
        let lib = sto3g_hydrogen();
        let shells = lib.basis_for(&chain_geometry(3, 1.5).unwrap()).unwrap();
        assert_eq!(shells.len(), 3);
        for s in &shells {
            assert!((s.self_overlap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(shells[2].center(), 2);
    }

    #[test]
    fn rejects_empty_and_bad_exponent() {
        assert!(ContractedSGaussian::new(0, vec![]).is_err());
        let bad = vec![Primitive {
            exponent: -1.0,
            coefficient: 1.0,
        }];
        assert!(ContractedSGaussian::new(0, bad).is_err());
    }

    #[test]
    fn missing_element() {
        let g = Geometry::new(vec![crate::molint::Atom {
            charge: 2,
            position: [0.0; 3],
        }])
        .unwrap();
        assert!(sto3g_hydrogen().basis_for(&g).is_err());
    }
}
