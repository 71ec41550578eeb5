//! Rank-truncated coupled cluster evaluated exactly in determinant space.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fockspace::{expm_action, ExcitationSignature, ExpmOptions, GeneratorMatrix, SectorBasis, SectorHamiltonian};
use crate::hamiltonian::MoHamiltonian;
use crate::linalg::{max_abs, Diis, LinearOperator};

/// Excitation-only cluster operator `T = Σ t_μ E_μ` with one amplitude per
/// excited determinant of rank `1..=max_rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOperator {
    pub max_rank: usize,
    pub signatures: Vec<ExcitationSignature>,
    pub amplitudes: Vec<f64>,
}

impl ClusterOperator {
    /// All Sz-conserving excitations of the reference up to `max_rank`,
    /// zero-initialized.
    pub fn zeros(basis: &SectorBasis, max_rank: usize) -> Self {
        let reference = basis.reference();
        let mut signatures: Vec<ExcitationSignature> = basis
            .dets()
            .iter()
            .filter_map(|&d| {
                let rank = (d.bits() & !reference.bits()).count_ones() as usize;
                (rank >= 1 && rank <= max_rank).then(|| {
                    ExcitationSignature::between(reference, d).expect("same sector")
                })
            })
            .collect();
        signatures.sort_unstable();
        let amplitudes = vec![0.0; signatures.len()];
        Self {
            max_rank,
            signatures,
            amplitudes,
        }
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn count_by_rank(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_rank + 1];
        for s in &self.signatures {
            counts[s.rank()] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcIteration {
    pub iteration: usize,
    pub energy: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcOptions {
    /// Added to every denominator.
    pub level_shift: f64,
    pub diis_depth: usize,
    /// Convergence threshold on the max-norm of the residual.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for CcOptions {
    fn default() -> Self {
        Self {
            level_shift: 0.0,
            diis_depth: 8,
            tol: 1e-9,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CcResult {
    pub energy: f64,
    pub operator: ClusterOperator,
    pub iterations: Vec<CcIteration>,
}

/// Precompiled pieces shared by every residual evaluation.
pub struct CcWorkspace<'h> {
    h: &'h MoHamiltonian,
    basis: SectorBasis,
    op: SectorHamiltonian,
    generator: GeneratorMatrix,
    /// Sector position of each excited determinant.
    targets: Vec<usize>,
    /// `Σε_virt − Σε_occ` per signature.
    denominators: Vec<f64>,
}

impl<'h> CcWorkspace<'h> {
    pub fn new(h: &'h MoHamiltonian, max_rank: usize) -> Result<(Self, ClusterOperator)> {
        if max_rank == 0 || max_rank > h.n_electrons() {
            return Err(Error::invalid("excitation rank must lie between 1 and the electron count"));
        }
        let basis = SectorBasis::for_hamiltonian(h)?;
        let op = SectorHamiltonian::new(h, &basis)?;
        let t = ClusterOperator::zeros(&basis, max_rank);
        let reference = basis.reference();
        let eps = h.orbital_energies();
        let mut targets = Vec::with_capacity(t.len());
        let mut denominators = Vec::with_capacity(t.len());
        for s in &t.signatures {
            let (d, _) = s.excite(reference).expect("signature acts on the reference");
            targets.push(basis.index_of(d).expect("excited determinant in sector"));
            let created: f64 = s.created().iter().map(|&p| eps[p / 2]).sum();
            let annihilated: f64 = s.annihilated().iter().map(|&p| eps[p / 2]).sum();
            denominators.push(created - annihilated);
        }
        let generator = GeneratorMatrix::new(basis.dets(), &t.signatures, false);
        Ok((
            Self {
                h,
                basis,
                op,
                generator,
                targets,
                denominators,
            },
            t,
        ))
    }

    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// `(E, r)` with `z = e^{-T} H e^{T} |Φ>`, `E = z_0` and `r_μ = z_μ`.
    pub fn residual(&self, amplitudes: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.basis.len();
        let mut phi = vec![0.0; n];
        phi[0] = 1.0;
        let terms = ExpmOptions::nilpotent(self.h.n_electrons() + 1);
        let psi = expm_action(&self.generator.bind(amplitudes, 1.0), &phi, &terms)?;
        let hpsi = self.op.apply(&psi);
        let z = expm_action(&self.generator.bind(amplitudes, -1.0), &hpsi, &terms)?;
        let r = self.targets.iter().map(|&i| z[i]).collect();
        Ok((z[0], r))
    }
}

/// Energy and residuals of `T` for `h`.
pub fn cc_residual(h: &MoHamiltonian, t: &ClusterOperator) -> Result<(f64, Vec<f64>)> {
    let (ws, template) = CcWorkspace::new(h, t.max_rank)?;
    if template.signatures != t.signatures {
        return Err(Error::invalid("cluster operator does not match the Hamiltonian's sector"));
    }
    ws.residual(&t.amplitudes)
}

pub fn cc_solve(h: &MoHamiltonian, max_rank: usize) -> Result<CcResult> {
    cc_solve_with(h, max_rank, &CcOptions::default())
}

/// Quasi-Newton iteration `t ← t − r/(Δε + shift)` with DIIS.
pub fn cc_solve_with(h: &MoHamiltonian, max_rank: usize, opts: &CcOptions) -> Result<CcResult> {
    let (ws, mut t) = CcWorkspace::new(h, max_rank)?;
    let denom: Vec<f64> = ws.denominators.iter().map(|d| d + opts.level_shift).collect();
    if denom.iter().any(|d| d.abs() < 1e-12) {
        return Err(Error::invalid("vanishing coupled-cluster denominator"));
    }

    // MP2-like doubles guess
    let (_, r0) = ws.residual(&t.amplitudes)?;
    for (k, s) in t.signatures.iter().enumerate() {
        if s.rank() == 2 {
            t.amplitudes[k] = -r0[k] / denom[k];
        }
    }

    let mut diis = Diis::new(opts.diis_depth);
    let mut trace = Vec::new();
    for iteration in 1..=opts.max_iterations {
        let (energy, r) = ws.residual(&t.amplitudes)?;
        let rn = max_abs(&r);
        trace.push(CcIteration {
            iteration,
            energy,
            residual_norm: rn,
        });
        if !energy.is_finite() || !rn.is_finite() {
            break;
        }
        if rn < opts.tol {
            return Ok(CcResult {
                energy,
                operator: t,
                iterations: trace,
            });
        }
        let updated: Vec<f64> = t
            .amplitudes
            .iter()
            .zip(&r)
            .zip(&denom)
            .map(|((a, r), d)| a - r / d)
            .collect();
        let step: Vec<f64> = updated.iter().zip(&t.amplitudes).map(|(u, a)| u - a).collect();
        t.amplitudes = if opts.diis_depth > 0 {
            diis.extrapolate(updated, step)
        } else {
            updated
        };
    }
    Err(Error::CcNotConverged(Box::new(trace)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{matrix_element, WaveVector};
    use crate::hamiltonian::{mo_transform, rhf_solve};
    use crate::molint::{build_ao_integrals, chain_geometry, sto3g_hydrogen};
    use crate::spectra::exact_diag;

    fn chain(n: usize, r: f64) -> MoHamiltonian {
        let g = chain_geometry(n, r).unwrap();
        let lib = sto3g_hydrogen();
        let ao = build_ao_integrals(&g, &lib.basis_for(&g).unwrap()).unwrap();
        let scf = rhf_solve(&ao, n).unwrap();
        mo_transform(&ao, &scf).unwrap()
    }

    #[test]
    fn zero_amplitudes_give_bare_couplings() {
        let h = chain(4, 2.0);
        let basis = SectorBasis::for_hamiltonian(&h).unwrap();
        let t = ClusterOperator::zeros(&basis, 2);
        let (e, r) = cc_residual(&h, &t).unwrap();
        assert!((e - h.reference_energy()).abs() < 1e-12);
        let reference = basis.reference();
        for (s, rk) in t.signatures.iter().zip(&r) {
            let (d, _) = s.excite(reference).unwrap();
            assert!((rk - matrix_element(&h, d, reference)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_electrons_ccsd_is_exact() {
        let h = chain(2, 1.4);
        let cc = cc_solve(&h, 2).unwrap();
        let ed = exact_diag(&h).unwrap();
        assert!((cc.energy - ed.energy).abs() < 1e-9);
    }

    #[test]
    fn full_rank_equals_ed() {
        let h = chain(4, 2.0);
        let cc = cc_solve(&h, 4).unwrap();
        let ed = exact_diag(&h).unwrap();
        assert!((cc.energy - ed.energy).abs() < 1e-8, "{} {}", cc.energy, ed.energy);
    }

    #[test]
    fn full_rank_amplitudes_reproduce_ground_state() {
        // e^T|Φ> is the intermediate-normalized ground state
        let h = chain(4, 2.0);
        let cc = cc_solve(&h, 4).unwrap();
        let ed = exact_diag(&h).unwrap();
        let basis = SectorBasis::for_hamiltonian(&h).unwrap();
        let m = GeneratorMatrix::new(basis.dets(), &cc.operator.signatures, false);
        let mut phi = vec![0.0; basis.len()];
        phi[0] = 1.0;
        let psi = expm_action(&m.bind(&cc.operator.amplitudes, 1.0), &phi, &ExpmOptions::nilpotent(5)).unwrap();
        let exact = WaveVector::from_coefficients(&basis, ed.vector.coefficients.clone()).unwrap();
        let c0 = exact.reference_component();
        for (a, b) in psi.iter().zip(&exact.coefficients) {
            assert!((a - b / c0).abs() < 1e-7);
        }
    }

    #[test]
    fn counts_by_rank() {
        let basis = SectorBasis::new(4, 2, 2).unwrap();
        let t = ClusterOperator::zeros(&basis, 4);
        // 2 α holes x 2 α particles: singles 4+4, doubles 1+1+16, ...
        assert_eq!(t.len(), 35);
        assert_eq!(t.count_by_rank(), vec![0, 8, 18, 8, 1]);
    }

    #[test]
    fn rank_bounds() {
        let h = chain(2, 1.4);
        assert!(cc_solve(&h, 0).is_err());
        assert!(cc_solve(&h, 3).is_err());
    }
}
