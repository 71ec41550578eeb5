use alloc::vec;
use alloc::vec::Vec;

use super::{Determinant, SectorBasis, WaveVector};
use crate::error::Result;
use crate::hamiltonian::MoHamiltonian;
use crate::linalg::LinearOperator;

fn occupied_list(d: Determinant, buf: &mut [usize; 64]) -> usize {
    let mut n = 0;
    for i in d.orbitals() {
        buf[n] = i;
        n += 1;
    }
    n
}

/// `<d|H|d>` including the core energy.
fn diagonal_element(h: &MoHamiltonian, occ: &[usize]) -> f64 {
    let mut e = h.core_energy();
    for (k, &i) in occ.iter().enumerate() {
        e += h.h(i, i);
        for &j in &occ[..k] {
            e += h.v(i, j, i, j);
        }
    }
    e
}

/// `<a-excited|H|ket>` for the single replacement `i -> a`, without phase.
fn single_element(h: &MoHamiltonian, occ: &[usize], i: usize, a: usize) -> f64 {
    let mut x = h.h(a, i);
    for &j in occ {
        x += h.v(a, j, i, j);
    }
    x
}

/// Phase of `a†_a a_i |d>`.
#[inline]
fn single_phase(d: Determinant, i: usize, a: usize) -> f64 {
    let (d1, s1) = d.annihilate_unchecked(i).expect("occupied");
    let (_, s2) = d1.create_unchecked(a).expect("empty");
    s1 * s2
}

/// Phase of `a†_a a†_b a_j a_i |d>`.
#[inline]
fn double_phase(d: Determinant, i: usize, j: usize, a: usize, b: usize) -> f64 {
    let (d1, s1) = d.annihilate_unchecked(i).expect("occupied");
    let (d2, s2) = d1.annihilate_unchecked(j).expect("occupied");
    let (d3, s3) = d2.create_unchecked(b).expect("empty");
    let (_, s4) = d3.create_unchecked(a).expect("empty");
    s1 * s2 * s3 * s4
}

/// Slater-Condon matrix element `<bra|H|ket>`.
pub fn matrix_element(h: &MoHamiltonian, bra: Determinant, ket: Determinant) -> f64 {
    if bra.count() != ket.count() {
        return 0.0;
    }
    let diff = bra.bits() ^ ket.bits();
    let mut buf = [0usize; 64];
    match diff.count_ones() {
        0 => {
            let n = occupied_list(ket, &mut buf);
            diagonal_element(h, &buf[..n])
        }
        2 => {
            let i = (ket.bits() & diff).trailing_zeros() as usize;
            let a = (bra.bits() & diff).trailing_zeros() as usize;
            let n = occupied_list(ket, &mut buf);
            single_phase(ket, i, a) * single_element(h, &buf[..n], i, a)
        }
        4 => {
            let mut holes = Determinant(ket.bits() & diff).orbitals();
            let mut parts = Determinant(bra.bits() & diff).orbitals();
            let (i, j) = (holes.next().unwrap(), holes.next().unwrap());
            let (a, b) = (parts.next().unwrap(), parts.next().unwrap());
            double_phase(ket, i, j, a, b) * h.v(a, b, i, j)
        }
        _ => 0.0,
    }
}

/// Visit every determinant connected to `ket` by H within its (Nα, Nβ)
/// sector, including `ket` itself, with the element `<target|H|ket>`.
fn for_each_connected(h: &MoHamiltonian, ket: Determinant, mut visit: impl FnMut(Determinant, f64)) {
    let nso = h.n_spin_orbitals();
    let mut occ_buf = [0usize; 64];
    let n_occ = occupied_list(ket, &mut occ_buf);
    let occ = &occ_buf[..n_occ];
    let mut virt_buf = [0usize; 64];
    let mut n_virt = 0;
    for p in 0..nso {
        if !ket.is_occupied(p) {
            virt_buf[n_virt] = p;
            n_virt += 1;
        }
    }
    let virt = &virt_buf[..n_virt];

    visit(ket, diagonal_element(h, occ));

    for &i in occ {
        for &a in virt {
            if i % 2 != a % 2 {
                continue;
            }
            let x = single_element(h, occ, i, a);
            if x != 0.0 {
                let target = Determinant(ket.bits() ^ (1u64 << i) ^ (1u64 << a));
                visit(target, single_phase(ket, i, a) * x);
            }
        }
    }

    for (ki, &i) in occ.iter().enumerate() {
        for &j in &occ[ki + 1..] {
            let spin_ij = i % 2 + j % 2;
            for (ka, &a) in virt.iter().enumerate() {
                for &b in &virt[ka + 1..] {
                    if a % 2 + b % 2 != spin_ij {
                        continue;
                    }
                    let x = h.v(a, b, i, j);
                    if x != 0.0 {
                        let target =
                            Determinant(ket.bits() ^ (1u64 << i) ^ (1u64 << j) ^ (1u64 << a) ^ (1u64 << b));
                        visit(target, double_phase(ket, i, j, a, b) * x);
                    }
                }
            }
        }
    }
}

/// `H|v>` evaluated determinant by determinant without storing H.
pub fn apply_hamiltonian(h: &MoHamiltonian, basis: &SectorBasis, v: &WaveVector) -> Result<WaveVector> {
    v.check(basis)?;
    if basis.key().n_spatial != h.n_spatial() {
        return Err(crate::error::Error::invalid(
            "sector and Hamiltonian disagree on the orbital count",
        ));
    }
    let mut out = vec![0.0; basis.len()];
    for (col, &ket) in basis.dets().iter().enumerate() {
        let c = v.coefficients[col];
        if c == 0.0 {
            continue;
        }
        for_each_connected(h, ket, |target, x| {
            if let Some(row) = basis.index_of(target) {
                out[row] += x * c;
            }
        });
    }
    WaveVector::from_coefficients(basis, out)
}

/// Sparse (CSR) matrix of H within one sector. Rows are assembled
/// independently, so the summation order of every product is fixed.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
    diagonal: Vec<f64>,
}

impl SectorHamiltonian {
    pub fn new(h: &MoHamiltonian, basis: &SectorBasis) -> Result<Self> {
        if basis.key().n_spatial != h.n_spatial() {
            return Err(crate::error::Error::invalid(
                "sector and Hamiltonian disagree on the orbital count",
            ));
        }
        let n = basis.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut diagonal = vec![0.0; n];
        row_ptr.push(0);
        for (row, &d) in basis.dets().iter().enumerate() {
            // H is real symmetric, so row d equals column d
            for_each_connected(h, d, |target, x| {
                if let Some(col) = basis.index_of(target) {
                    if col == row {
                        diagonal[row] = x;
                    }
                    cols.push(col as u32);
                    values.push(x);
                }
            });
            row_ptr.push(cols.len());
        }
        Ok(Self {
            row_ptr,
            cols,
            values,
            diagonal,
        })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Largest absolute matrix element.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn expectation(&self, v: &[f64]) -> f64 {
        crate::linalg::dot(v, &self.apply(v))
    }
}

impl LinearOperator for SectorHamiltonian {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (row, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molint::EriTensor;
    use nalgebra::DMatrix;

    /// Random-looking but symmetric 2-orbital integrals.
    fn toy() -> MoHamiltonian {
        let h = DMatrix::from_row_slice(2, 2, &[-1.1, 0.23, 0.23, -0.4]);
        let vals = [0.71, 0.12, 0.55, 0.09, 0.18, 0.64];
        let mut k = 0;
        let eri = EriTensor::from_fn(2, |_, _, _, _| {
            let x = vals[k % vals.len()];
            k += 1;
            x
        });
        MoHamiltonian::from_spatial(h, eri, 0.37, 2).unwrap()
    }

    /// Brute force: apply the full second-quantized H term by term.
    fn brute_force_element(h: &MoHamiltonian, bra: Determinant, ket: Determinant) -> f64 {
        let n = h.n_spin_orbitals();
        let apply = |d: Determinant, ops: &[(bool, usize)]| -> Option<(Determinant, f64)> {
            let mut cur = d;
            let mut s = 1.0;
            for &(create, i) in ops.iter().rev() {
                let (nd, p) = if create {
                    cur.create_unchecked(i)?
                } else {
                    cur.annihilate_unchecked(i)?
                };
                cur = nd;
                s *= p;
            }
            Some((cur, s))
        };
        let mut e = if bra == ket { h.core_energy() } else { 0.0 };
        for p in 0..n {
            for q in 0..n {
                if let Some((d, s)) = apply(ket, &[(true, p), (false, q)]) {
                    if d == bra {
                        e += h.h(p, q) * s;
                    }
                }
                for r in 0..n {
                    for t in 0..n {
                        if let Some((d, s)) = apply(ket, &[(true, p), (true, q), (false, t), (false, r)]) {
                            if d == bra {
                                e += 0.25 * h.v(p, q, r, t) * s;
                            }
                        }
                    }
                }
            }
        }
        e
    }

    #[test]
    fn dense_matrix_matches_brute_force() {
        let h = toy();
        for (na, nb) in [(1, 1), (2, 0), (1, 0), (2, 1)] {
            let basis = SectorBasis::new(2, na, nb).unwrap();
            let csr = SectorHamiltonian::new(&h, &basis).unwrap();
            for (c, &ket) in basis.dets().iter().enumerate() {
                let mut e = vec![0.0; basis.len()];
                e[c] = 1.0;
                let col = csr.apply(&e);
                let otf = apply_hamiltonian(&h, &basis, &WaveVector::from_coefficients(&basis, e).unwrap())
                    .unwrap();
                for (r, &bra) in basis.dets().iter().enumerate() {
                    let oracle = brute_force_element(&h, bra, ket);
                    assert!((col[r] - oracle).abs() < 1e-13, "({na},{nb}) {r},{c}");
                    assert!((otf.coefficients[r] - oracle).abs() < 1e-13);
                    assert!((matrix_element(&h, bra, ket) - oracle).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn spin_sectors_do_not_mix() {
        let h = toy();
        let a = Determinant::from_orbitals([0, 1]);
        let b = Determinant::from_orbitals([0, 2]);
        assert_eq!(matrix_element(&h, a, b), 0.0);
        assert_eq!(brute_force_element(&h, a, b), 0.0);
    }
}
