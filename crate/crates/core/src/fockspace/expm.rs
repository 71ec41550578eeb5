use alloc::vec::Vec;

use super::{GeneratorMatrix, SectorBasis, WaveVector};
use super::ExcitationSignature;
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm, LinearOperator};

pub const DEFAULT_EXPM_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpmOptions {
    /// Stop once a Taylor term's norm falls below this.
    pub tol: f64,
    pub max_terms: usize,
    /// For nilpotent generators: ignore `tol` and run until a term is
    /// exactly zero.
    pub exact: bool,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_EXPM_TOL,
            max_terms: DEFAULT_MAX_TERMS,
            exact: false,
        }
    }
}

impl ExpmOptions {
    pub fn nilpotent(max_terms: usize) -> Self {
        Self {
            tol: 0.0,
            max_terms,
            exact: true,
        }
    }
}

/// `e^A v` by the truncated Taylor series `Σ A^k v / k!`.
pub fn expm_action<A: LinearOperator>(op: &A, v: &[f64], opts: &ExpmOptions) -> Result<Vec<f64>> {
    let mut result = v.to_vec();
    let mut term = v.to_vec();
    let mut next = alloc::vec![0.0; v.len()];
    if norm(&term) == 0.0 {
        return Ok(result);
    }
    for k in 1..=opts.max_terms {
        op.apply_into(&term, &mut next);
        let inv = 1.0 / k as f64;
        next.iter_mut().for_each(|x| *x *= inv);
        core::mem::swap(&mut term, &mut next);
        let tn = norm(&term);
        if tn == 0.0 {
            return Ok(result);
        }
        axpy(1.0, &term, &mut result);
        if !opts.exact && tn < opts.tol {
            return Ok(result);
        }
    }
    Err(Error::NotConverged {
        stage: "exponential Taylor series",
        iterations: opts.max_terms,
        last: norm(&term),
    })
}

/// `e^{Σ θ_k E_k} |v>` (excitation-only, exact termination) or
/// `e^{Σ θ_k (E_k - E_k†)} |v>` (anti-Hermitian, truncated at `tol`).
pub fn expm_apply(
    basis: &SectorBasis,
    pool_slice: &[(ExcitationSignature, f64)],
    v: &WaveVector,
    antihermitian: bool,
    tol: f64,
) -> Result<WaveVector> {
    v.check(basis)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("exponential tolerance must be positive"));
    }
    let sigs: Vec<ExcitationSignature> = pool_slice.iter().map(|(s, _)| *s).collect();
    let amps: Vec<f64> = pool_slice.iter().map(|(_, a)| *a).collect();
    let m = GeneratorMatrix::new(basis.dets(), &sigs, antihermitian);
    let opts = if antihermitian {
        ExpmOptions {
            tol,
            ..ExpmOptions::default()
        }
    } else {
        // a product of more excitations than electrons always vanishes
        ExpmOptions::nilpotent(basis.key().n_alpha + basis.key().n_beta + 1)
    };
    let out = expm_action(&m.bind(&amps, 1.0), &v.coefficients, &opts)?;
    WaveVector::from_coefficients(basis, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::Determinant;
    use crate::linalg::dot;
    use proptest::prelude::*;

    fn all_signatures(b: &SectorBasis) -> Vec<ExcitationSignature> {
        let r = b.reference();
        b.dets()
            .iter()
            .skip(1)
            .map(|&d| ExcitationSignature::between(r, d).unwrap())
            .collect()
    }

    #[test]
    fn zero_generator_is_identity() {
        let b = SectorBasis::new(4, 2, 2).unwrap();
        let sigs = all_signatures(&b);
        let slice: Vec<_> = sigs.iter().map(|&s| (s, 0.0)).collect();
        let v = WaveVector::from_coefficients(&b, (0..b.len()).map(|i| i as f64).collect()).unwrap();
        let out = expm_apply(&b, &slice, &v, true, 1e-12).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn two_level_rotation() {
        let b = SectorBasis::new(4, 2, 2).unwrap();
        let sig = all_signatures(&b)[5];
        let theta = 0.37;
        let out = expm_apply(&b, &[(sig, theta)], &WaveVector::reference(&b), true, 1e-14).unwrap();
        let mu = b.index_of(Determinant(b.reference().bits() ^ sig.support())).unwrap();
        assert!((out.coefficients[0] - theta.cos()).abs() < 1e-13);
        assert!((out.coefficients[mu] - theta.sin()).abs() < 1e-13);
        assert!((out.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn excitation_series_terminates() {
        let b = SectorBasis::new(4, 2, 2).unwrap();
        let sigs = all_signatures(&b);
        let amps: Vec<f64> = (0..sigs.len()).map(|k| 0.3 + 0.01 * k as f64).collect();
        let m = GeneratorMatrix::new(b.dets(), &sigs, false);
        let op = m.bind(&amps, 1.0);
        // T^(n_electrons+1) v = 0 exactly
        let mut t = WaveVector::reference(&b).coefficients;
        for _ in 0..4 {
            t = op.apply(&t);
        }
        assert!(t.iter().any(|&x| x != 0.0));
        let t5 = op.apply(&t);
        assert!(t5.iter().all(|&x| x == 0.0));
        expm_action(&op, &WaveVector::reference(&b).coefficients, &ExpmOptions::nilpotent(5)).unwrap();
    }

    #[test]
    fn non_convergence_reported() {
        let b = SectorBasis::new(4, 2, 2).unwrap();
        let sigs = all_signatures(&b);
        let amps = alloc::vec![3.0; sigs.len()];
        let m = GeneratorMatrix::new(b.dets(), &sigs, true);
        let opts = ExpmOptions {
            max_terms: 5,
            ..ExpmOptions::default()
        };
        assert!(matches!(
            expm_action(&m.bind(&amps, 1.0), &WaveVector::reference(&b).coefficients, &opts),
            Err(Error::NotConverged { .. })
        ));
    }

    fn random_setup(seed: &[f64]) -> (SectorBasis, Vec<ExcitationSignature>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let b = SectorBasis::new(4, 2, 2).unwrap();
        let sigs = all_signatures(&b);
        let amps: Vec<f64> = (0..sigs.len()).map(|k| 0.2 * seed[k % seed.len()] * ((k % 5) as f64 - 2.0) / 2.0).collect();
        let u: Vec<f64> = (0..b.len()).map(|i| seed[(i * 7) % seed.len()] - 0.5 + (i % 3) as f64 * 0.1).collect();
        let w: Vec<f64> = (0..b.len()).map(|i| seed[(i * 3 + 1) % seed.len()] * ((i % 4) as f64 - 1.5)).collect();
        (b, sigs, amps, u, w)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_and_invertible(seed in proptest::collection::vec(-1.0f64..1.0, 7..13)) {
            let tol = 1e-12;
            let (b, sigs, amps, u, w) = random_setup(&seed);
            let m = GeneratorMatrix::new(b.dets(), &sigs, true);
            let opts = ExpmOptions { tol, ..ExpmOptions::default() };
            let eu = expm_action(&m.bind(&amps, 1.0), &u, &opts).unwrap();
            let ew = expm_action(&m.bind(&amps, 1.0), &w, &opts).unwrap();
            prop_assert!((norm(&eu) - norm(&u)).abs() <= 10.0 * tol * norm(&u).max(1.0));
            prop_assert!((dot(&eu, &ew) - dot(&u, &w)).abs() <= 10.0 * tol * (norm(&u) * norm(&w)).max(1.0));
            let back = expm_action(&m.bind(&amps, -1.0), &eu, &opts).unwrap();
            let err = back.iter().zip(&u).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 20.0 * tol * norm(&u).max(1.0));
        }
    }
}
