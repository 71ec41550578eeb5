//! Summary JSON, the method × system energy table, CSV traces and
//! amplitude dumps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qflow_core::ccbaseline::{CcIteration, ClusterOperator};
use qflow_core::hamiltonian::ScfIteration;
use qflow_core::qflow::FlowReport;

use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::pipeline::{Details, RunOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub label: String,
    pub status: String,
    /// Hartree.
    pub energy: Option<f64>,
    pub error_vs_ed_mhartree: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub converged: bool,
    pub cycles: usize,
    pub n_spaces: usize,
    pub e_primary: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub spread: f64,
    pub spread_mhartree: f64,
    pub pool_size: usize,
    /// Entry counts indexed by excitation rank.
    pub rank_counts: Vec<usize>,
    pub max_gradient: f64,
}

impl FlowSummary {
    pub fn from_report(r: &FlowReport) -> Self {
        Self {
            converged: r.converged,
            cycles: r.cycles,
            n_spaces: r.spaces.len(),
            e_primary: r.e_primary,
            e_min: r.e_min,
            e_max: r.e_max,
            spread: r.spread,
            spread_mhartree: r.spread * 1e3,
            pool_size: r.pool.len(),
            rank_counts: r.pool.count_by_rank(),
            max_gradient: r.gradient_norms.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub system: String,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub core_energy: f64,
    pub results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qflow: Option<FlowSummary>,
}

impl Summary {
    pub fn from_outcome(outcome: &RunOutcome, cfg: &RunConfig) -> Self {
        let h = &outcome.system.hamiltonian;
        let ed = outcome.energy(Method::Ed);
        let results = outcome
            .results
            .iter()
            .map(|r| ResultRow {
                method: r.method,
                label: r.method.label(&cfg.cas),
                status: if r.error.is_none() { "ok" } else { "failed" }.into(),
                energy: r.energy,
                error_vs_ed_mhartree: match (r.energy, ed) {
                    (Some(e), Some(x)) => Some((e - x) * 1e3),
                    _ => None,
                },
                message: r.error.as_ref().map(|e| e.to_string()),
            })
            .collect();
        let qflow = outcome.results.iter().find_map(|r| match &r.details {
            Details::Flow(f) => Some(FlowSummary::from_report(f)),
            _ => None,
        });
        Self {
            system: outcome.system.label.clone(),
            n_orbitals: h.n_spatial(),
            n_electrons: h.n_electrons(),
            core_energy: h.core_energy(),
            results,
            qflow,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("summary JSON: {e}")))
    }
}

/// Energies (Hartree) by row label and system, in table order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub systems: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: Method,
    pub label: String,
    pub energies: Vec<Option<f64>>,
}

pub fn table(summaries: &[Summary]) -> Table {
    let systems = summaries.iter().map(|s| s.system.clone()).collect();
    let rows = Method::ALL
        .into_iter()
        .filter_map(|m| {
            let label = summaries
                .iter()
                .flat_map(|s| &s.results)
                .find(|r| r.method == m)?
                .label
                .clone();
            let energies = summaries
                .iter()
                .map(|s| s.results.iter().find(|r| r.method == m).and_then(|r| r.energy))
                .collect();
            Some(TableRow {
                method: m,
                label,
                energies,
            })
        })
        .collect();
    Table { systems, rows }
}

impl Table {
    /// Fixed-width text with energies to four decimals.
    pub fn render(&self) -> String {
        let label_w = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(6).max(6);
        let col_w = self.systems.iter().map(|s| s.len()).max().unwrap_or(0).max(10);
        let mut out = format!("{:<label_w$}", "Method");
        for s in &self.systems {
            write!(out, "  {s:>col_w$}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{:<label_w$}", r.label).unwrap();
            for e in &r.energies {
                match e {
                    Some(x) => write!(out, "  {x:>col_w$.4}").unwrap(),
                    None => write!(out, "  {:>col_w$}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }
}

pub fn scf_trace_csv(trace: &[ScfIteration]) -> String {
    let mut out = String::from("cycle,energy,density_rms\n");
    for it in trace {
        writeln!(out, "{},{:.12},{:.6e}", it.cycle, it.energy, it.density_rms).unwrap();
    }
    out
}

pub fn cc_trace_csv(trace: &[CcIteration]) -> String {
    let mut out = String::from("iteration,energy,residual_norm\n");
    for it in trace {
        writeln!(out, "{},{:.12},{:.6e}", it.iteration, it.energy, it.residual_norm).unwrap();
    }
    out
}

pub fn cc_amplitudes(t: &ClusterOperator) -> String {
    let mut out = String::new();
    for (s, a) in t.signatures.iter().zip(&t.amplitudes) {
        writeln!(out, "{s} {a:.12e}").unwrap();
    }
    out
}

/// `E(h_i)` at the start of each cycle; the last block is the final pool.
pub fn flow_trace_csv(r: &FlowReport) -> String {
    let mut out = String::from("cycle,space_ordinal,energy_hartree\n");
    let rows = r.trace.iter().chain(std::iter::once(&r.energies));
    for (c, energies) in rows.enumerate() {
        for (i, e) in energies.iter().enumerate() {
            writeln!(out, "{},{},{:.12}", c + 1, i, e).unwrap();
        }
    }
    out
}

/// Per-cycle minimum and maximum of `E(h_i)`.
pub fn flow_minmax_csv(r: &FlowReport) -> String {
    let mut out = String::from("cycle,min_hartree,max_hartree,spread_mhartree,max_gradient\n");
    let rows = r.trace.iter().chain(std::iter::once(&r.energies));
    for (c, energies) in rows.enumerate() {
        let mn = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let mx = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let g = r.gradient_norms.get(c).map_or(String::new(), |g| format!("{g:.6e}"));
        writeln!(out, "{},{:.12},{:.12},{:.6},{}", c + 1, mn, mx, (mx - mn) * 1e3, g).unwrap();
    }
    out
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `summary.json`, `table.txt`, `table.json` and, when tracing,
/// the per-method traces and amplitude dumps.
pub fn write_outputs(outcome: &RunOutcome, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let summary = Summary::from_outcome(outcome, cfg);
    let t = table(std::slice::from_ref(&summary));
    write(dir, "summary.json", &summary.to_json(), &mut written)?;
    write(dir, "table.txt", &t.render(), &mut written)?;
    write(dir, "table.json", &t.to_json(), &mut written)?;
    if !cfg.output.trace {
        return Ok(written);
    }
    if let Some(scf) = &outcome.system.scf {
        write(dir, "scf_trace.csv", &scf_trace_csv(&scf.iterations), &mut written)?;
    }
    for r in &outcome.results {
        match &r.details {
            Details::Cc { trace, amplitudes } => {
                write(dir, &format!("{}_trace.csv", r.method), &cc_trace_csv(trace), &mut written)?;
                if let Some(t) = amplitudes {
                    write(dir, &format!("{}_amplitudes.txt", r.method), &cc_amplitudes(t), &mut written)?;
                }
            }
            Details::Flow(f) => {
                write(dir, "qflow_trace.csv", &flow_trace_csv(f), &mut written)?;
                write(dir, "qflow_minmax.csv", &flow_minmax_csv(f), &mut written)?;
                write(dir, "qflow_pool.txt", &f.pool.to_string(), &mut written)?;
            }
            Details::None => {}
        }
    }
    Ok(written)
}
