use alloc::vec;
use alloc::vec::Vec;

use super::{Determinant, ExcitationSignature, SectorBasis, WaveVector};
use crate::error::Result;
use crate::linalg::LinearOperator;

/// `Σ_k θ_k E_k |v>`, or `Σ_k θ_k (E_k - E_k†) |v>` when `antihermitian`,
/// evaluated directly from the signatures.
pub fn apply_generator(
    basis: &SectorBasis,
    pool_slice: &[(ExcitationSignature, f64)],
    v: &WaveVector,
    antihermitian: bool,
) -> Result<WaveVector> {
    v.check(basis)?;
    let mut out = vec![0.0; basis.len()];
    for (col, &d) in basis.dets().iter().enumerate() {
        let c = v.coefficients[col];
        if c == 0.0 {
            continue;
        }
        for (sig, theta) in pool_slice {
            if let Some((t, p)) = sig.excite(d) {
                if let Some(row) = basis.index_of(t) {
                    out[row] += theta * p * c;
                }
            }
            if antihermitian {
                if let Some((t, p)) = sig.deexcite(d) {
                    if let Some(row) = basis.index_of(t) {
                        out[row] -= theta * p * c;
                    }
                }
            }
        }
    }
    WaveVector::from_coefficients(basis, out)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    col: u32,
    signature: u32,
    sign: f64,
}

/// Sparsity pattern of a generator `Σ_k θ_k E_k` (or its anti-Hermitian
/// form) over a sorted determinant list, independent of the amplitude values.
///
/// Every nonzero `(row, col)` pair belongs to exactly one signature, so the
/// pattern is compiled once and re-bound to new amplitudes at no cost.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    dim: usize,
    n_signatures: usize,
    row_ptr: Vec<usize>,
    entries: Vec<Entry>,
}

impl GeneratorMatrix {
    /// `dets` must be sorted ascending.
    pub fn new(dets: &[Determinant], signatures: &[ExcitationSignature], antihermitian: bool) -> Self {
        let n = dets.len();
        let mut rows: Vec<Vec<Entry>> = vec![Vec::new(); n];
        for (src, &d) in dets.iter().enumerate() {
            for (k, sig) in signatures.iter().enumerate() {
                let Some((t, p)) = sig.excite(d) else { continue };
                let Ok(dst) = dets.binary_search(&t) else { continue };
                rows[dst].push(Entry {
                    col: src as u32,
                    signature: k as u32,
                    sign: p,
                });
                if antihermitian {
                    rows[src].push(Entry {
                        col: dst as u32,
                        signature: k as u32,
                        sign: -p,
                    });
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        row_ptr.push(0);
        for r in rows {
            entries.extend(r);
            row_ptr.push(entries.len());
        }
        Self {
            dim: n,
            n_signatures: signatures.len(),
            row_ptr,
            entries,
        }
    }

    pub fn n_signatures(&self) -> usize {
        self.n_signatures
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Attach amplitudes (indexed like the compile-time signature list),
    /// scaled by `scale`.
    pub fn bind<'a>(&'a self, amplitudes: &'a [f64], scale: f64) -> BoundGenerator<'a> {
        assert_eq!(amplitudes.len(), self.n_signatures, "amplitude count mismatch");
        BoundGenerator {
            matrix: self,
            amplitudes,
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundGenerator<'a> {
    matrix: &'a GeneratorMatrix,
    amplitudes: &'a [f64],
    scale: f64,
}

impl BoundGenerator<'_> {
    /// Upper bound on the 1-norm of the bound operator.
    pub fn column_sum_bound(&self) -> f64 {
        let m = self.matrix;
        let mut col_sums = vec![0.0; m.dim];
        for e in &m.entries {
            col_sums[e.col as usize] += (self.amplitudes[e.signature as usize] * self.scale).abs();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }
}

impl LinearOperator for BoundGenerator<'_> {
    fn dim(&self) -> usize {
        self.matrix.dim
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let m = self.matrix;
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in &m.entries[m.row_ptr[row]..m.row_ptr[row + 1]] {
                acc += e.sign * self.amplitudes[e.signature as usize] * x[e.col as usize];
            }
            *out = acc * self.scale;
        }
    }
}
