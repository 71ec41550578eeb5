//! Dense and iterative linear-algebra helpers shared by the solvers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// A real linear map `y = A x` on vectors of fixed length.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending
/// and eigenvectors (columns) permuted accordingly.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `S^{-1/2}` for a symmetric positive-definite matrix. Returns the smallest
/// eigenvalue alongside so callers can judge conditioning.
pub fn inverse_sqrt(s: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let (values, vectors) = symmetric_eigen(s);
    let n = s.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let f = 1.0 / libm::sqrt(v.max(f64::MIN_POSITIVE));
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    (&scaled * vectors.transpose(), values.first().copied().unwrap_or(0.0))
}

/// Lowest eigenpair of a symmetric matrix. Among (numerically) degenerate
/// ground states the vector with the largest weight on `reference` is chosen,
/// and its sign is fixed so that component is non-negative.
pub fn lowest_eigenpair(m: &DMatrix<f64>, reference: usize) -> (f64, Vec<f64>) {
    let (values, vectors) = symmetric_eigen(m);
    let n = m.nrows();
    let e0 = values[0];
    let degenerate: Vec<usize> = (0..n)
        .take_while(|&k| (values[k] - e0).abs() <= 1e-10 * e0.abs().max(1.0))
        .collect();
    let mut v: Vec<f64> = if degenerate.len() > 1 {
        // project the reference onto the degenerate subspace
        let mut acc = vec![0.0; n];
        for &k in &degenerate {
            let c = vectors[(reference, k)];
            for i in 0..n {
                acc[i] += c * vectors[(i, k)];
            }
        }
        let nrm = norm(&acc);
        if nrm > 1e-12 {
            acc.iter().map(|x| x / nrm).collect()
        } else {
            vectors.column(0).iter().copied().collect()
        }
    } else {
        vectors.column(0).iter().copied().collect()
    };
    fix_sign(&mut v, reference);
    (e0, v)
}

/// Flip `v` so that `v[reference] >= 0`; if that component vanishes, the
/// first non-negligible component is made positive instead.
pub fn fix_sign(v: &mut [f64], reference: usize) {
    let pivot = if v[reference].abs() > 1e-14 {
        v[reference]
    } else {
        v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0)
    };
    if pivot < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Davidson iteration for the lowest eigenpair of a symmetric operator with
/// diagonal preconditioning.
pub fn davidson_lowest<A: LinearOperator>(
    op: &A,
    diagonal: &[f64],
    guess: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    const MAX_SUBSPACE: usize = 48;
    let n = op.dim();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut start = guess.to_vec();
    let nrm = norm(&start);
    if nrm == 0.0 {
        return Err(Error::invalid("Davidson guess vector is zero"));
    }
    start.iter_mut().for_each(|x| *x /= nrm);
    let mut pending = start;
    let mut last_residual = f64::INFINITY;

    for _ in 0..max_iter {
        images.push(op.apply(&pending));
        basis.push(pending);

        let m = basis.len();
        let mut sub = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let x = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                sub[(i, j)] = x;
                sub[(j, i)] = x;
            }
        }
        let (values, vectors) = symmetric_eigen(&sub);
        let theta = values[0];
        let y: Vec<f64> = vectors.column(0).iter().copied().collect();

        let mut ritz = vec![0.0; n];
        let mut residual = vec![0.0; n];
        for k in 0..m {
            axpy(y[k], &basis[k], &mut ritz);
            axpy(y[k], &images[k], &mut residual);
        }
        axpy(-theta, &ritz, &mut residual);
        last_residual = norm(&residual);
        if last_residual < tol {
            return Ok((theta, ritz));
        }

        let mut correction: Vec<f64> = residual
            .iter()
            .zip(diagonal)
            .map(|(r, d)| {
                let denom = theta - d;
                if denom.abs() < 1e-8 {
                    r / 1e-8_f64.copysign(denom)
                } else {
                    r / denom
                }
            })
            .collect();

        if m >= MAX_SUBSPACE {
            let mut ritz_image = vec![0.0; n];
            for k in 0..m {
                axpy(y[k], &images[k], &mut ritz_image);
            }
            let rn = norm(&ritz);
            ritz.iter_mut().for_each(|x| *x /= rn);
            ritz_image.iter_mut().for_each(|x| *x /= rn);
            basis = vec![ritz.clone()];
            images = vec![ritz_image];
        }

        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &correction);
                axpy(-c, b, &mut correction);
            }
        }
        let cn = norm(&correction);
        if cn < 1e-14 {
            // subspace exhausted; the Ritz pair is as good as it gets
            return Ok((theta, ritz));
        }
        correction.iter_mut().for_each(|x| *x /= cn);
        pending = correction;
    }
    Err(Error::NotConverged {
        stage: "davidson",
        iterations: max_iter,
        last: last_residual,
    })
}

/// Pulay DIIS extrapolation over flat parameter/error vector pairs.
#[derive(Debug, Clone)]
pub struct Diis {
    depth: usize,
    params: Vec<Vec<f64>>,
    errors: Vec<Vec<f64>>,
}

impl Diis {
    pub fn new(depth: usize) -> Self {
        Self {
            depth: depth.max(1),
            params: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Store a (parameters, error) pair and return the extrapolated parameters.
    /// Falls back to the newest parameters if the DIIS system is singular.
    pub fn extrapolate(&mut self, params: Vec<f64>, error: Vec<f64>) -> Vec<f64> {
        if self.params.len() == self.depth {
            self.params.remove(0);
            self.errors.remove(0);
        }
        self.params.push(params);
        self.errors.push(error);
        let m = self.params.len();
        if m < 2 {
            return self.params[m - 1].clone();
        }
        let mut b = DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        for i in 0..m {
            for j in 0..=i {
                let x = dot(&self.errors[i], &self.errors[j]);
                b[(i, j)] = x;
                b[(j, i)] = x;
            }
            b[(i, m)] = -1.0;
            b[(m, i)] = -1.0;
        }
        rhs[m] = -1.0;
        // scale to keep the bordered system well balanced
        let scale = (0..m).map(|i| b[(i, i)]).fold(0.0, f64::max);
        if scale > 0.0 {
            for i in 0..m {
                for j in 0..m {
                    b[(i, j)] /= scale;
                }
            }
        }
        let Some(coeffs) = b.lu().solve(&rhs) else {
            return self.params[m - 1].clone();
        };
        if coeffs.iter().any(|c| !c.is_finite()) {
            return self.params[m - 1].clone();
        }
        let mut out = vec![0.0; self.params[0].len()];
        for k in 0..m {
            axpy(coeffs[k], &self.params[k], &mut out);
        }
        out
    }
}
