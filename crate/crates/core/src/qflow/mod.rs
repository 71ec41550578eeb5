//! The active-space flow: SES active spaces, the shared amplitude pool,
//! dressed effective Hamiltonians, commutator gradients and the cyclic
//! block sweep.

mod flow;
mod heff;
mod pool;
mod space;

pub use flow::{
    qflow_cycle, qflow_run, qflow_run_with, BlockEvaluation, FlowConfig, FlowContext, FlowReport, FlowState,
    StepPolicy, SweepMode,
};
pub use heff::{block_energy, block_gradient, build_effective_hamiltonian, EffectiveHamiltonian};
pub use pool::{build_pool, internal_signatures, partition_pool, AmplitudePool, Partition, PoolEntry};
pub use space::{enumerate_active_spaces, ActiveSpace};
