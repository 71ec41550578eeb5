use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use nalgebra::DMatrix;

use super::boys::boys_f0_unchecked;
use super::geometry::distance;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::molint::{nuclear_repulsion, Atom, ContractedSGaussian, Geometry};

const MIN_OVERLAP_EIGENVALUE: f64 = 1e-10;

/// A single normalized Cartesian Gaussian. Only `angular == 0` is supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrimitive {
    pub exponent: f64,
    pub center: [f64; 3],
    pub angular: u32,
}

impl GaussianPrimitive {
    pub fn s(exponent: f64, center: [f64; 3]) -> Self {
        Self {
            exponent,
            center,
            angular: 0,
        }
    }

    fn norm(&self) -> f64 {
        libm::pow(2.0 * self.exponent / PI, 0.75)
    }
}

fn require_s(prims: &[&GaussianPrimitive]) -> Result<()> {
    match prims.iter().find(|p| p.angular != 0) {
        Some(p) => Err(Error::Unsupported(format!(
            "angular momentum l = {} (only s functions are implemented)",
            p.angular
        ))),
        None => Ok(()),
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = distance(a, b);
    d * d
}

fn product_center(a: &GaussianPrimitive, b: &GaussianPrimitive) -> [f64; 3] {
    let p = a.exponent + b.exponent;
    let mut c = [0.0; 3];
    for k in 0..3 {
        c[k] = (a.exponent * a.center[k] + b.exponent * b.center[k]) / p;
    }
    c
}

fn overlap_raw(a: &GaussianPrimitive, b: &GaussianPrimitive) -> f64 {
    let p = a.exponent + b.exponent;
    let mu = a.exponent * b.exponent / p;
    a.norm() * b.norm() * libm::pow(PI / p, 1.5) * libm::exp(-mu * dist2(&a.center, &b.center))
}

fn kinetic_raw(a: &GaussianPrimitive, b: &GaussianPrimitive) -> f64 {
    let p = a.exponent + b.exponent;
    let mu = a.exponent * b.exponent / p;
    let r2 = dist2(&a.center, &b.center);
    mu * (3.0 - 2.0 * mu * r2) * overlap_raw(a, b)
}

fn nuclear_raw(a: &GaussianPrimitive, b: &GaussianPrimitive, nuclei: &[Atom]) -> f64 {
    let p = a.exponent + b.exponent;
    let mu = a.exponent * b.exponent / p;
    let pc = product_center(a, b);
    let pref = a.norm() * b.norm() * 2.0 * PI / p * libm::exp(-mu * dist2(&a.center, &b.center));
    nuclei
        .iter()
        .map(|n| -f64::from(n.charge) * pref * boys_f0_unchecked(p * dist2(&pc, &n.position)))
        .sum()
}

fn eri_raw(
    a: &GaussianPrimitive,
    b: &GaussianPrimitive,
    c: &GaussianPrimitive,
    d: &GaussianPrimitive,
) -> f64 {
    let p = a.exponent + b.exponent;
    let q = c.exponent + d.exponent;
    let mu_ab = a.exponent * b.exponent / p;
    let mu_cd = c.exponent * d.exponent / q;
    let pc = product_center(a, b);
    let qc = product_center(c, d);
    let t = p * q / (p + q) * dist2(&pc, &qc);
    let norms = a.norm() * b.norm() * c.norm() * d.norm();
    norms * 2.0 * libm::pow(PI, 2.5) / (p * q * libm::sqrt(p + q))
        * libm::exp(-mu_ab * dist2(&a.center, &b.center) - mu_cd * dist2(&c.center, &d.center))
        * boys_f0_unchecked(t)
}

pub fn primitive_overlap(a: &GaussianPrimitive, b: &GaussianPrimitive) -> Result<f64> {
    require_s(&[a, b])?;
    Ok(overlap_raw(a, b))
}

pub fn primitive_kinetic(a: &GaussianPrimitive, b: &GaussianPrimitive) -> Result<f64> {
    require_s(&[a, b])?;
    Ok(kinetic_raw(a, b))
}

/// Attraction to all `nuclei` (already multiplied by `-Z`).
pub fn primitive_nuclear(
    a: &GaussianPrimitive,
    b: &GaussianPrimitive,
    nuclei: &[Atom],
) -> Result<f64> {
    require_s(&[a, b])?;
    Ok(nuclear_raw(a, b, nuclei))
}

/// Chemist-notation repulsion `(ab|cd)`.
pub fn primitive_eri(
    a: &GaussianPrimitive,
    b: &GaussianPrimitive,
    c: &GaussianPrimitive,
    d: &GaussianPrimitive,
) -> Result<f64> {
    require_s(&[a, b, c, d])?;
    Ok(eri_raw(a, b, c, d))
}

/// Four-index array with the 8-fold permutational symmetry of real
/// two-electron integrals, stored once per unique index quartet.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

impl EriTensor {
    pub fn zeros(n: usize) -> Self {
        let npair = n * (n + 1) / 2;
        Self {
            n,
            data: vec![0.0; npair * (npair + 1) / 2],
        }
    }

    /// Fill from a function evaluated once per canonical quartet
    /// `(i >= j, k >= l, ij >= kl)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                for k in 0..n {
                    for l in 0..=k {
                        let (ij, kl) = (pair_index(i, j), pair_index(k, l));
                        if ij >= kl {
                            t.data[pair_index(ij, kl)] = f(i, j, k, l);
                        }
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(i: usize, j: usize, k: usize, l: usize) -> usize {
        pair_index(pair_index(i, j), pair_index(k, l))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[Self::slot(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        self.data[Self::slot(i, j, k, l)] = value;
    }

    /// Canonical quartets `(i >= j, k >= l, ij >= kl)` with their values.
    pub fn unique(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (0..=i).flat_map(move |j| {
                (0..n).flat_map(move |k| {
                    (0..=k).filter_map(move |l| {
                        (pair_index(i, j) >= pair_index(k, l))
                            .then(|| ((i, j, k, l), self.get(i, j, k, l)))
                    })
                })
            })
        })
    }
}

/// Atomic-orbital integrals for one geometry and basis.
#[derive(Debug, Clone)]
pub struct AoIntegralSet {
    pub n_ao: usize,
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: EriTensor,
    pub e_nuc: f64,
}

impl AoIntegralSet {
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }
}

fn expand(shell: &ContractedSGaussian, geometry: &Geometry) -> Vec<(f64, GaussianPrimitive)> {
    let center = geometry.atoms()[shell.center()].position;
    shell
        .primitives()
        .iter()
        .map(|p| (p.coefficient, GaussianPrimitive::s(p.exponent, center)))
        .collect()
}

fn contract2(
    a: &[(f64, GaussianPrimitive)],
    b: &[(f64, GaussianPrimitive)],
    f: impl Fn(&GaussianPrimitive, &GaussianPrimitive) -> f64,
) -> f64 {
    let mut s = 0.0;
    for (ca, pa) in a {
        for (cb, pb) in b {
            s += ca * cb * f(pa, pb);
        }
    }
    s
}

pub fn build_ao_integrals(
    geometry: &Geometry,
    basis: &[ContractedSGaussian],
) -> Result<AoIntegralSet> {
    if let Some((i, s)) = basis
        .iter()
        .enumerate()
        .find(|(_, s)| s.center() >= geometry.len())
    {
        return Err(Error::invalid(format!(
            "basis function {i} centred on atom {} but geometry has {} atoms",
            s.center(),
            geometry.len()
        )));
    }
    let n = basis.len();
    let prims: Vec<_> = basis.iter().map(|s| expand(s, geometry)).collect();
    let atoms = geometry.atoms();

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = contract2(&prims[i], &prims[j], overlap_raw);
            let t = contract2(&prims[i], &prims[j], kinetic_raw);
            let v = contract2(&prims[i], &prims[j], |a, b| nuclear_raw(a, b, atoms));
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            kinetic[(i, j)] = t;
            kinetic[(j, i)] = t;
            nuclear[(i, j)] = v;
            nuclear[(j, i)] = v;
        }
    }

    let eri = EriTensor::from_fn(n, |i, j, k, l| {
        let mut s = 0.0;
        for (ci, pi) in &prims[i] {
            for (cj, pj) in &prims[j] {
                for (ck, pk) in &prims[k] {
                    for (cl, pl) in &prims[l] {
                        s += ci * cj * ck * cl * eri_raw(pi, pj, pk, pl);
                    }
                }
            }
        }
        s
    });

    if n > 0 {
        let (values, _) = symmetric_eigen(&overlap);
        if values[0] < MIN_OVERLAP_EIGENVALUE {
            return Err(Error::IllConditionedBasis(values[0]));
        }
    }

    Ok(AoIntegralSet {
        n_ao: n,
        overlap,
        kinetic,
        nuclear,
        eri,
        e_nuc: nuclear_repulsion(geometry)?,
    })
}
