use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{partition_pool, ActiveSpace, AmplitudePool};
use crate::error::{Error, Result};
use crate::fockspace::{
    expm_action, ExcitationSignature, ExpmOptions, GeneratorMatrix, SectorBasis, SectorHamiltonian,
    DEFAULT_MAX_TERMS,
};
use crate::hamiltonian::MoHamiltonian;
use crate::linalg::{dot, LinearOperator};
use crate::spectra::CasBasis;

/// Hamiltonian dressed by the external amplitudes and projected onto a CAS.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub cas: CasBasis,
    pub matrix: DMatrix<f64>,
    pub trotter_order: usize,
    /// Largest `|A − Aᵀ|` before symmetrization.
    pub asymmetry: f64,
}

pub(crate) fn expm_options(tol: f64) -> ExpmOptions {
    ExpmOptions {
        tol,
        max_terms: DEFAULT_MAX_TERMS,
        exact: false,
    }
}

/// Applies the dressing `G = (e^{σ_ext/N} e^{σ_int/N})^{N−1} e^{σ_ext/N}`
/// or its transpose, given full-pool amplitude vectors with the internal and
/// external parts separated.
pub(crate) struct Dressing<'a> {
    pub generator: &'a GeneratorMatrix,
    pub external: &'a [f64],
    pub internal: &'a [f64],
    pub order: usize,
    pub opts: ExpmOptions,
}

impl Dressing<'_> {
    fn step(&self, amps: &[f64], sign: f64, v: &[f64]) -> Result<Vec<f64>> {
        expm_action(
            &self.generator.bind(amps, sign / self.order as f64),
            v,
            &self.opts,
        )
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.step(self.external, 1.0, v)?;
        for _ in 1..self.order {
            x = self.step(self.internal, 1.0, &x)?;
            x = self.step(self.external, 1.0, &x)?;
        }
        Ok(x)
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut x = v.to_vec();
        for _ in 1..self.order {
            x = self.step(self.external, -1.0, &x)?;
            x = self.step(self.internal, -1.0, &x)?;
        }
        self.step(self.external, -1.0, &x)
    }
}

/// Builds `H^eff(h_i, N)` column by column: `ψ_ν = G|Φ_ν>`,
/// `A[μ,ν] = <ψ_μ|H|ψ_ν>`.
pub fn build_effective_hamiltonian(
    h: &MoHamiltonian,
    pool: &AmplitudePool,
    space: &ActiveSpace,
    trotter_order: usize,
    tol: f64,
) -> Result<EffectiveHamiltonian> {
    if trotter_order == 0 {
        return Err(Error::invalid("Trotter order must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("exponential tolerance must be positive"));
    }
    let basis = SectorBasis::for_hamiltonian(h)?;
    let op = SectorHamiltonian::new(h, &basis)?;
    let cas = CasBasis::for_hamiltonian(h, space)?;
    let generator = GeneratorMatrix::new(basis.dets(), pool.signatures(), true);
    let part = partition_pool(pool, space);
    let values = pool.values();
    let (mut internal, mut external) = (vec![0.0; pool.len()], vec![0.0; pool.len()]);
    for &k in &part.internal {
        internal[k] = values[k];
    }
    for &k in &part.external {
        external[k] = values[k];
    }
    let dressing = Dressing {
        generator: &generator,
        external: &external,
        internal: &internal,
        order: trotter_order,
        opts: expm_options(tol),
    };
    let embedding = cas.embedding(&basis)?;
    effective_matrix(&op, &dressing, cas, &embedding, trotter_order, tol)
}

pub(crate) fn effective_matrix(
    op: &SectorHamiltonian,
    dressing: &Dressing<'_>,
    cas: CasBasis,
    embedding: &[usize],
    trotter_order: usize,
    tol: f64,
) -> Result<EffectiveHamiltonian> {
    let n = cas.len();
    let dim = op.dim();
    let mut psi = Vec::with_capacity(n);
    let mut hpsi = Vec::with_capacity(n);
    for &pos in embedding {
        let mut e = vec![0.0; dim];
        e[pos] = 1.0;
        let p = dressing.apply(&e)?;
        hpsi.push(op.apply(&p));
        psi.push(p);
    }
    let mut a = DMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in 0..n {
            a[(mu, nu)] = dot(&psi[mu], &hpsi[nu]);
        }
    }
    let mut asymmetry: f64 = 0.0;
    for mu in 0..n {
        for nu in 0..mu {
            asymmetry = asymmetry.max((a[(mu, nu)] - a[(nu, mu)]).abs());
        }
    }
    let limit = 100.0 * tol;
    if asymmetry > limit {
        return Err(Error::NumericalIntegrity {
            what: "effective Hamiltonian asymmetry",
            value: asymmetry,
            limit,
        });
    }
    let matrix = (&a + a.transpose()) * 0.5;
    Ok(EffectiveHamiltonian {
        cas,
        matrix,
        trotter_order,
        asymmetry,
    })
}

/// `τ_k |v>` for `τ_k = E_k − E_k†`, inside a CAS.
pub(crate) fn apply_tau(cas: &CasBasis, sig: &ExcitationSignature, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (col, &d) in cas.dets().iter().enumerate() {
        let c = v[col];
        if c == 0.0 {
            continue;
        }
        if let Some((t, p)) = sig.excite(d) {
            if let Some(row) = cas.index_of(t) {
                out[row] += p * c;
            }
        }
        if let Some((t, p)) = sig.deexcite(d) {
            if let Some(row) = cas.index_of(t) {
                out[row] -= p * c;
            }
        }
    }
    out
}

/// `e^{σ_int/N}|Φ>` in the CAS basis.
pub(crate) fn internal_state(
    cas: &CasBasis,
    internal: &[(ExcitationSignature, f64)],
    trotter_order: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let sigs: Vec<ExcitationSignature> = internal.iter().map(|(s, _)| *s).collect();
    let amps: Vec<f64> = internal.iter().map(|(_, a)| *a).collect();
    let m = GeneratorMatrix::new(cas.dets(), &sigs, true);
    let mut phi = vec![0.0; cas.len()];
    phi[0] = 1.0;
    expm_action(&m.bind(&amps, 1.0 / trotter_order as f64), &phi, &expm_options(tol))
}

fn check_slice(heff: &EffectiveHamiltonian, internal: &[(ExcitationSignature, f64)]) -> Result<()> {
    let mask = heff.cas.space().spin_mask();
    if internal.iter().any(|(s, _)| !s.within(mask)) {
        return Err(Error::invalid("signature is not internal to the active space"));
    }
    Ok(())
}

/// `<Ψ_int|H^eff|Ψ_int> / <Ψ_int|Ψ_int>` with `Ψ_int = e^{σ_int/N}|Φ>`.
pub fn block_energy(heff: &EffectiveHamiltonian, internal: &[(ExcitationSignature, f64)], tol: f64) -> Result<f64> {
    check_slice(heff, internal)?;
    let psi = internal_state(&heff.cas, internal, heff.trotter_order, tol)?;
    let hpsi = &heff.matrix * nalgebra::DVector::from_column_slice(&psi);
    Ok(dot(&psi, hpsi.as_slice()) / dot(&psi, &psi))
}

/// `<Ψ_int|[H^eff, τ_k]|Ψ_int>` for each signature in `owned`.
pub fn block_gradient(
    heff: &EffectiveHamiltonian,
    internal: &[(ExcitationSignature, f64)],
    owned: &[ExcitationSignature],
    tol: f64,
) -> Result<Vec<f64>> {
    check_slice(heff, internal)?;
    if owned.iter().any(|s| !internal.iter().any(|(t, _)| t == s)) {
        return Err(Error::invalid("owned signature missing from the internal slice"));
    }
    let psi = internal_state(&heff.cas, internal, heff.trotter_order, tol)?;
    let hpsi = &heff.matrix * nalgebra::DVector::from_column_slice(&psi);
    let nn = dot(&psi, &psi);
    Ok(owned
        .iter()
        .map(|s| 2.0 * dot(hpsi.as_slice(), &apply_tau(&heff.cas, s, &psi)) / nn)
        .collect())
}
