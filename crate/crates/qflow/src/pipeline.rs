//! Geometry → integrals → SCF → Hamiltonian, then the requested methods.
//! Each method runs in isolation: a failure is recorded and the remaining
//! methods still execute.

use std::path::Path;

use qflow_core::ccbaseline::{cc_solve_with, CcIteration, ClusterOperator};
use qflow_core::hamiltonian::{mo_transform, rhf_solve, MoHamiltonian, ScfResult};
use qflow_core::molint::{build_ao_integrals, chain_geometry, AoIntegralSet, Geometry};
use qflow_core::qflow::{enumerate_active_spaces, qflow_run, FlowConfig, FlowReport};
use qflow_core::spectra::{cas_ed, exact_diag_with, CasBasis};

use crate::basis_file::{default_basis, load_basis};
use crate::config::{Method, RunConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::fcidump::load_fcidump;
use crate::geometry_file::load_geometry;

/// A prepared Hamiltonian plus whatever produced it.
#[derive(Debug, Clone)]
pub struct System {
    pub label: String,
    pub geometry: Option<Geometry>,
    pub ao: Option<AoIntegralSet>,
    pub scf: Option<ScfResult>,
    pub hamiltonian: MoHamiltonian,
}

pub fn system_label(cfg: &SystemConfig) -> String {
    if let Some(l) = &cfg.label {
        return l.clone();
    }
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    match (&cfg.chain, &cfg.geometry, &cfg.fcidump) {
        (Some(c), _, _) => format!("H{} ({:.1} a.u.)", c.atoms, c.spacing),
        (_, Some(g), _) => stem(g),
        (_, _, Some(f)) => stem(f),
        _ => "system".into(),
    }
}

pub fn load_system_geometry(cfg: &SystemConfig) -> Result<Geometry> {
    match (&cfg.chain, &cfg.geometry) {
        (Some(c), None) => chain_geometry(c.atoms, c.spacing).map_err(Error::stage("geometry")),
        (None, Some(path)) => load_geometry(path),
        _ => Err(Error::Config("give exactly one of system.chain or system.geometry".into())),
    }
}

pub fn ao_integrals(cfg: &SystemConfig, geometry: &Geometry) -> Result<AoIntegralSet> {
    let lib = match &cfg.basis {
        Some(p) => load_basis(p)?,
        None => default_basis(),
    };
    let shells = lib.basis_for(geometry).map_err(Error::stage("basis"))?;
    build_ao_integrals(geometry, &shells).map_err(Error::stage("integrals"))
}

pub fn build_system(cfg: &SystemConfig) -> Result<System> {
    let label = system_label(cfg);
    if let Some(path) = &cfg.fcidump {
        let (_, hamiltonian) = load_fcidump(path)?;
        return Ok(System {
            label,
            geometry: None,
            ao: None,
            scf: None,
            hamiltonian,
        });
    }
    let geometry = load_system_geometry(cfg)?;
    let ao = ao_integrals(cfg, &geometry)?;
    let n_electrons = geometry.total_charge() as usize;
    let scf = rhf_solve(&ao, n_electrons).map_err(Error::stage("scf"))?;
    let hamiltonian = mo_transform(&ao, &scf).map_err(Error::stage("mo-transform"))?;
    Ok(System {
        label,
        geometry: Some(geometry),
        ao: Some(ao),
        scf: Some(scf),
        hamiltonian,
    })
}

#[derive(Debug, Clone)]
pub enum Details {
    None,
    Cc {
        trace: Vec<CcIteration>,
        amplitudes: Option<ClusterOperator>,
    },
    Flow(Box<FlowReport>),
}

#[derive(Debug)]
pub struct MethodOutcome {
    pub method: Method,
    pub energy: Option<f64>,
    pub error: Option<Error>,
    pub details: Details,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub system: System,
    pub results: Vec<MethodOutcome>,
}

impl RunOutcome {
    pub fn energy(&self, m: Method) -> Option<f64> {
        self.results.iter().find(|r| r.method == m).and_then(|r| r.energy)
    }

    /// Exit status of the first failed method, or 0.
    pub fn exit_code(&self) -> i32 {
        self.results
            .iter()
            .find_map(|r| r.error.as_ref().map(Error::exit_code))
            .unwrap_or(0)
    }
}

pub fn run_method(system: &System, method: Method, cfg: &RunConfig) -> MethodOutcome {
    let h = &system.hamiltonian;
    let mut details = Details::None;
    let result: Result<f64> = match method {
        Method::Hf => Ok(system.scf.as_ref().map_or_else(|| h.reference_energy(), |s| s.e_hf)),
        Method::Ed => exact_diag_with(h, &cfg.diag_options())
            .map(|g| g.energy)
            .map_err(Error::stage("ed")),
        Method::CasEd => primary_cas(h, cfg)
            .and_then(|cas| cas_ed(h, &cas))
            .map(|g| g.energy)
            .map_err(Error::stage("cas-ed")),
        Method::Ccsd | Method::Ccsdt | Method::Ccsdtq => {
            let rank = method.cc_rank().expect("coupled-cluster method");
            match cc_solve_with(h, rank, &cfg.cc_options()) {
                Ok(r) => {
                    details = Details::Cc {
                        trace: r.iterations,
                        amplitudes: Some(r.operator),
                    };
                    Ok(r.energy)
                }
                Err(e) => {
                    if let qflow_core::Error::CcNotConverged(trace) = &e {
                        details = Details::Cc {
                            trace: trace.to_vec(),
                            amplitudes: None,
                        };
                    }
                    Err(Error::stage(cc_stage(rank))(e))
                }
            }
        }
        Method::Qflow => run_flow(h, &cfg.flow_config()).map(|r| {
            let e = r.e_primary;
            let converged = r.converged;
            details = Details::Flow(Box::new(r));
            (e, converged)
        })
        .and_then(|(e, converged)| {
            if converged {
                Ok(e)
            } else {
                Err(Error::Stage {
                    stage: "qflow",
                    source: qflow_core::Error::NotConverged {
                        stage: "qflow",
                        iterations: cfg.qflow.max_cycles,
                        last: e,
                    },
                })
            }
        }),
    };
    match result {
        Ok(energy) => MethodOutcome {
            method,
            energy: Some(energy),
            error: None,
            details,
        },
        Err(e) => {
            // an unconverged flow still reports its last energy
            let energy = match &details {
                Details::Flow(r) => Some(r.e_primary),
                _ => None,
            };
            MethodOutcome {
                method,
                energy,
                error: Some(e),
                details,
            }
        }
    }
}

fn cc_stage(rank: usize) -> &'static str {
    match rank {
        2 => "ccsd",
        3 => "ccsdt",
        _ => "ccsdtq",
    }
}

fn primary_cas(h: &MoHamiltonian, cfg: &RunConfig) -> qflow_core::Result<CasBasis> {
    let spaces = enumerate_active_spaces(
        &h.orbital_energies(),
        h.n_occupied(),
        cfg.cas.n_occ_act,
        cfg.cas.n_virt_act,
    )?;
    CasBasis::for_hamiltonian(h, &spaces[0])
}

fn run_flow(h: &MoHamiltonian, flow: &FlowConfig) -> Result<FlowReport> {
    qflow_run(h, flow).map_err(Error::stage("qflow"))
}

/// Executes the configured methods in table order. Returns `None` for an
/// empty method list.
pub fn run(cfg: &RunConfig) -> Result<Option<RunOutcome>> {
    cfg.validate()?;
    if cfg.methods.is_empty() {
        return Ok(None);
    }
    let system = build_system(&cfg.system)?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let results = methods.into_iter().map(|m| run_method(&system, m, cfg)).collect();
    Ok(Some(RunOutcome { system, results }))
}

/// Runs the flow on integrals read from an FCIDUMP file. Orbital energies
/// come from the diagonal of the file's Fock matrix.
pub fn qflow_from_fcidump(path: &Path, config: &FlowConfig) -> Result<FlowReport> {
    let (_, h) = load_fcidump(path)?;
    run_flow(&h, config)
}
