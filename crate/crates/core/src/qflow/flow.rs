use alloc::vec;
use alloc::vec::Vec;

use super::heff::{apply_tau, effective_matrix, expm_options, Dressing};
use super::{build_pool, enumerate_active_spaces, partition_pool, ActiveSpace, AmplitudePool, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::fockspace::{expm_action, GeneratorMatrix, SectorBasis, SectorHamiltonian, DEFAULT_EXPM_TOL};
use crate::hamiltonian::MoHamiltonian;
use crate::linalg::{dot, max_abs, LinearOperator};
use crate::spectra::CasBasis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// `θ ← θ − step·g`.
    SteepestDescent { step: f64 },
    /// `θ ← θ − step·g / (2Δε + shift)` with `Δε = Σε_virt − Σε_occ`.
    Preconditioned { step: f64, shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Blocks see the updates of earlier blocks in the same cycle.
    GaussSeidel,
    /// Every block reads the cycle-start pool.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub n_occ_act: usize,
    pub n_virt_act: usize,
    /// Keep only the first `k` spaces of the ordering.
    pub space_limit: Option<usize>,
    pub step: StepPolicy,
    pub sweep: SweepMode,
    pub trotter_order: usize,
    pub expm_tol: f64,
    pub g_tol: f64,
    pub e_tol: f64,
    pub max_cycles: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            n_occ_act: 2,
            n_virt_act: 2,
            space_limit: None,
            step: StepPolicy::SteepestDescent { step: 0.1 },
            sweep: SweepMode::GaussSeidel,
            trotter_order: 1,
            expm_tol: DEFAULT_EXPM_TOL,
            g_tol: 1e-6,
            e_tol: 1e-8,
            max_cycles: 500,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.expm_tol) || !positive(self.g_tol) || !positive(self.e_tol) {
            return Err(Error::invalid("flow tolerances must be positive"));
        }
        if self.trotter_order == 0 {
            return Err(Error::invalid("Trotter order must be at least 1"));
        }
        let step = match self.step {
            StepPolicy::SteepestDescent { step } => step,
            StepPolicy::Preconditioned { step, shift } => {
                if !shift.is_finite() || shift < 0.0 {
                    return Err(Error::invalid("preconditioner shift must be non-negative"));
                }
                step
            }
        };
        if !positive(step) {
            return Err(Error::invalid("step size must be positive"));
        }
        if self.space_limit == Some(0) {
            return Err(Error::invalid("space limit must keep at least one space"));
        }
        Ok(())
    }
}

/// Energy and owned-amplitude gradient of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEvaluation {
    pub energy: f64,
    /// Same order as the block's owned pool indices.
    pub gradient: Vec<f64>,
}

struct Block {
    space: ActiveSpace,
    cas: CasBasis,
    embedding: Vec<usize>,
    internal: Vec<usize>,
    owned: Vec<usize>,
    /// `σ_int` restricted to the CAS determinants.
    cas_generator: GeneratorMatrix,
}

/// Everything a flow needs that does not depend on the amplitude values:
/// sector, sparse H, generator patterns and per-space index maps.
///
/// Blocks are evaluated without forming `H^eff`: for `Ψ_int` embedded in the
/// sector, `E = <GΨ_int|H|GΨ_int>` and `H^eff Ψ_int = P Gᵀ H G Ψ_int`.
pub struct FlowContext<'h> {
    h: &'h MoHamiltonian,
    basis: SectorBasis,
    op: SectorHamiltonian,
    generator: GeneratorMatrix,
    blocks: Vec<Block>,
    template: AmplitudePool,
    denominators: Vec<f64>,
    trotter_order: usize,
    expm_tol: f64,
}

impl<'h> FlowContext<'h> {
    pub fn new(h: &'h MoHamiltonian, config: &FlowConfig) -> Result<Self> {
        config.validate()?;
        let eps = h.orbital_energies();
        let mut spaces = enumerate_active_spaces(&eps, h.n_occupied(), config.n_occ_act, config.n_virt_act)?;
        if let Some(k) = config.space_limit {
            spaces.truncate(k);
        }
        Self::with_spaces(h, spaces, config.trotter_order, config.expm_tol)
    }

    pub fn with_spaces(h: &'h MoHamiltonian, spaces: Vec<ActiveSpace>, trotter_order: usize, expm_tol: f64) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::invalid("flow needs at least one active space"));
        }
        if spaces.iter().enumerate().any(|(i, s)| s.ordinal != i) {
            return Err(Error::invalid("active-space ordinals must be 0, 1, 2, ..."));
        }
        let basis = SectorBasis::for_hamiltonian(h)?;
        let op = SectorHamiltonian::new(h, &basis)?;
        let template = build_pool(&spaces, basis.reference());
        let generator = GeneratorMatrix::new(basis.dets(), template.signatures(), true);
        let eps = h.orbital_energies();
        let denominators = template
            .signatures()
            .iter()
            .map(|s| {
                s.created().iter().map(|&p| eps[p / 2]).sum::<f64>()
                    - s.annihilated().iter().map(|&p| eps[p / 2]).sum::<f64>()
            })
            .collect();
        let mut blocks = Vec::with_capacity(spaces.len());
        for space in spaces {
            let cas = CasBasis::for_hamiltonian(h, &space)?;
            let embedding = cas.embedding(&basis)?;
            let internal = partition_pool(&template, &space).internal;
            let owned = template.owned_by(space.ordinal);
            let sigs: Vec<_> = internal.iter().map(|&k| template.signatures()[k]).collect();
            let cas_generator = GeneratorMatrix::new(cas.dets(), &sigs, true);
            blocks.push(Block {
                space,
                cas,
                embedding,
                internal,
                owned,
                cas_generator,
            });
        }
        Ok(Self {
            h,
            basis,
            op,
            generator,
            blocks,
            template,
            denominators,
            trotter_order,
            expm_tol,
        })
    }

    pub fn hamiltonian(&self) -> &MoHamiltonian {
        self.h
    }

    pub fn n_spaces(&self) -> usize {
        self.blocks.len()
    }

    pub fn spaces(&self) -> Vec<ActiveSpace> {
        self.blocks.iter().map(|b| b.space.clone()).collect()
    }

    pub fn pool_template(&self) -> &AmplitudePool {
        &self.template
    }

    /// `Σε_virt − Σε_occ` per pool entry.
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    pub fn owned(&self, block: usize) -> &[usize] {
        &self.blocks[block].owned
    }

    pub fn internal(&self, block: usize) -> &[usize] {
        &self.blocks[block].internal
    }

    fn split(&self, block: &Block, values: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut external = values.to_vec();
        let mut internal = vec![0.0; values.len()];
        let mut local = Vec::with_capacity(block.internal.len());
        for &k in &block.internal {
            internal[k] = values[k];
            external[k] = 0.0;
            local.push(values[k]);
        }
        (internal, external, local)
    }

    fn dressing<'a>(&'a self, internal: &'a [f64], external: &'a [f64]) -> Dressing<'a> {
        Dressing {
            generator: &self.generator,
            external,
            internal,
            order: self.trotter_order,
            opts: expm_options(self.expm_tol),
        }
    }

    /// `E(h_i)` and, if requested, the commutator gradient on the owned
    /// amplitudes, for pool values `values`.
    pub fn evaluate(&self, block: usize, values: &[f64], with_gradient: bool) -> Result<BlockEvaluation> {
        if values.len() != self.template.len() {
            return Err(Error::invalid("pool length mismatch"));
        }
        let b = &self.blocks[block];
        let (internal, external, local) = self.split(b, values);
        let mut phi = vec![0.0; b.cas.len()];
        phi[0] = 1.0;
        let psi_int = expm_action(
            &b.cas_generator.bind(&local, 1.0 / self.trotter_order as f64),
            &phi,
            &expm_options(self.expm_tol),
        )?;
        let mut x = vec![0.0; self.basis.len()];
        for (&pos, &c) in b.embedding.iter().zip(&psi_int) {
            x[pos] = c;
        }
        let dressing = self.dressing(&internal, &external);
        let y = dressing.apply(&x)?;
        let hy = self.op.apply(&y);
        let nn = dot(&y, &y);
        let energy = dot(&y, &hy) / nn;
        if !energy.is_finite() {
            return Err(Error::NumericalIntegrity {
                what: "block energy",
                value: energy,
                limit: f64::MAX,
            });
        }
        let gradient = if with_gradient && !b.owned.is_empty() {
            let w_full = dressing.apply_transpose(&hy)?;
            let w: Vec<f64> = b.embedding.iter().map(|&pos| w_full[pos]).collect();
            b.owned
                .iter()
                .map(|&k| {
                    let sig = &self.template.signatures()[k];
                    2.0 * dot(&w, &apply_tau(&b.cas, sig, &psi_int)) / nn
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(BlockEvaluation { energy, gradient })
    }

    /// `E(h_i)` for every block at fixed pool values.
    pub fn energies(&self, values: &[f64]) -> Result<Vec<f64>> {
        (0..self.blocks.len())
            .map(|i| self.evaluate(i, values, false).map(|e| e.energy))
            .collect()
    }

    /// Explicit `H^eff` of one block.
    pub fn effective_hamiltonian(&self, block: usize, values: &[f64]) -> Result<EffectiveHamiltonian> {
        let b = &self.blocks[block];
        let (internal, external, _) = self.split(b, values);
        let dressing = self.dressing(&internal, &external);
        effective_matrix(&self.op, &dressing, b.cas.clone(), &b.embedding, self.trotter_order, self.expm_tol)
    }

    /// New values for the owned amplitudes of `block` after one step.
    fn step(&self, block: usize, values: &[f64], gradient: &[f64], policy: StepPolicy, out: &mut [f64]) {
        for (&k, &g) in self.blocks[block].owned.iter().zip(gradient) {
            out[k] = values[k]
                - match policy {
                    StepPolicy::SteepestDescent { step } => step * g,
                    StepPolicy::Preconditioned { step, shift } => step * g / (2.0 * self.denominators[k] + shift),
                };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub pool: AmplitudePool,
    pub cycle: usize,
    /// Per completed cycle: `E(h_i)` for every space at cycle start.
    pub trace: Vec<Vec<f64>>,
    /// Per completed cycle: largest owned gradient magnitude seen in the sweep.
    pub gradient_norms: Vec<f64>,
    pub converged: bool,
    /// `E(h_i)` at the current pool values, when known.
    pub energies: Option<Vec<f64>>,
}

impl FlowState {
    pub fn new(ctx: &FlowContext<'_>) -> Self {
        Self {
            pool: ctx.pool_template().clone(),
            cycle: 0,
            trace: Vec::new(),
            gradient_norms: Vec::new(),
            converged: false,
            energies: None,
        }
    }
}

/// One sweep over all blocks. On error the state is left untouched.
pub fn qflow_cycle(ctx: &FlowContext<'_>, state: &mut FlowState, config: &FlowConfig) -> Result<()> {
    let start = state.pool.values();
    let start_energies = match &state.energies {
        Some(e) => e.clone(),
        None => ctx.energies(&start)?,
    };
    let mut values = start.clone();
    let mut gmax: f64 = 0.0;
    for i in 0..ctx.n_spaces() {
        let read = match config.sweep {
            SweepMode::GaussSeidel => &values,
            SweepMode::Jacobi => &start,
        };
        let eval = ctx.evaluate(i, read, true)?;
        gmax = gmax.max(max_abs(&eval.gradient));
        let read = read.clone();
        ctx.step(i, &read, &eval.gradient, config.step, &mut values);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalIntegrity {
            what: "amplitude update",
            value: f64::INFINITY,
            limit: f64::MAX,
        });
    }
    let end_energies = ctx.energies(&values)?;
    let de = (end_energies[0] - start_energies[0]).abs();

    state.pool.set_values(&values);
    state.trace.push(start_energies);
    state.gradient_norms.push(gmax);
    state.cycle += 1;
    state.converged = gmax < config.g_tol && de < config.e_tol;
    state.energies = Some(end_energies);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub converged: bool,
    pub cycles: usize,
    pub spaces: Vec<ActiveSpace>,
    /// `E(h_i)` at the final pool.
    pub energies: Vec<f64>,
    pub e_primary: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub spread: f64,
    pub pool: AmplitudePool,
    pub trace: Vec<Vec<f64>>,
    pub gradient_norms: Vec<f64>,
}

impl FlowReport {
    fn from_state(ctx: &FlowContext<'_>, state: FlowState) -> Result<Self> {
        let energies = match state.energies {
            Some(e) => e,
            None => ctx.energies(&state.pool.values())?,
        };
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            converged: state.converged,
            cycles: state.cycle,
            spaces: ctx.spaces(),
            e_primary: energies[0],
            e_min,
            e_max,
            spread: e_max - e_min,
            energies,
            pool: state.pool,
            trace: state.trace,
            gradient_norms: state.gradient_norms,
        })
    }
}

/// Runs cycles until the owned gradients and the primary-space energy
/// change fall below their tolerances, or `max_cycles` is reached.
pub fn qflow_run(h: &MoHamiltonian, config: &FlowConfig) -> Result<FlowReport> {
    let ctx = FlowContext::new(h, config)?;
    qflow_run_with(&ctx, config, |_| {})
}

/// As [`qflow_run`] on a prebuilt context, calling `observer` after every
/// cycle.
pub fn qflow_run_with(
    ctx: &FlowContext<'_>,
    config: &FlowConfig,
    mut observer: impl FnMut(&FlowState),
) -> Result<FlowReport> {
    let mut state = FlowState::new(ctx);
    while state.cycle < config.max_cycles && !state.converged {
        qflow_cycle(ctx, &mut state, config)?;
        observer(&state);
    }
    FlowReport::from_state(ctx, state)
}
