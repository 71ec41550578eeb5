//! Run configuration: a TOML document with a top-level `methods` list and
//! `[system]`, `[cas]`, `[qflow]`, `[cc]`, `[ed]` and `[output]` sections.
//! Every key can also be set from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qflow_core::ccbaseline::CcOptions;
use qflow_core::qflow::{FlowConfig, StepPolicy as CoreStep, SweepMode as CoreSweep};
use qflow_core::spectra::DiagOptions;

use crate::error::{Error, Result};

/// Methods in the row order of the report table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hf,
    CasEd,
    Ccsd,
    Ccsdt,
    Ccsdtq,
    Qflow,
    Ed,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Hf,
        Method::CasEd,
        Method::Ccsd,
        Method::Ccsdt,
        Method::Ccsdtq,
        Method::Qflow,
        Method::Ed,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Method::Hf => "hf",
            Method::CasEd => "cas_ed",
            Method::Ccsd => "ccsd",
            Method::Ccsdt => "ccsdt",
            Method::Ccsdtq => "ccsdtq",
            Method::Qflow => "qflow",
            Method::Ed => "ed",
        }
    }

    pub fn cc_rank(self) -> Option<usize> {
        match self {
            Method::Ccsd => Some(2),
            Method::Ccsdt => Some(3),
            Method::Ccsdtq => Some(4),
            _ => None,
        }
    }

    /// Row label; the QFlow and CAS labels depend on the active-space shape.
    pub fn label(self, cas: &CasConfig) -> String {
        match self {
            Method::Hf => "HF".into(),
            Method::CasEd => "CAS-ED".into(),
            Method::Ccsd => "CCSD".into(),
            Method::Ccsdt => "CCSDT".into(),
            Method::Ccsdtq => "CCSDTQ".into(),
            Method::Qflow => format!(
                "QFlow({}e,{}o)",
                2 * cas.n_occ_act,
                cas.n_occ_act + cas.n_virt_act
            ),
            Method::Ed => "ED".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.key() == norm || (norm == "cased" && *m == Method::CasEd))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}` (expected one of hf, cas_ed, ccsd, ccsdt, ccsdtq, qflow, ed)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub atoms: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub label: Option<String>,
    pub chain: Option<Chain>,
    pub geometry: Option<PathBuf>,
    /// Defaults to the bundled STO-3G file.
    pub basis: Option<PathBuf>,
    /// Use these integrals instead of building them from a geometry.
    pub fcidump: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CasConfig {
    pub n_occ_act: usize,
    pub n_virt_act: usize,
}

impl Default for CasConfig {
    fn default() -> Self {
        Self {
            n_occ_act: 2,
            n_virt_act: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    SteepestDescent,
    Preconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    GaussSeidel,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QflowConfig {
    pub step_policy: StepKind,
    pub step: f64,
    pub shift: f64,
    pub sweep: SweepKind,
    pub trotter_order: usize,
    pub expm_tol: f64,
    pub g_tol: f64,
    pub e_tol: f64,
    pub max_cycles: usize,
    /// Keep only the first spaces of the ordering.
    pub max_spaces: Option<usize>,
}

impl Default for QflowConfig {
    fn default() -> Self {
        let d = FlowConfig::default();
        Self {
            step_policy: StepKind::SteepestDescent,
            step: 0.1,
            shift: 0.0,
            sweep: SweepKind::GaussSeidel,
            trotter_order: d.trotter_order,
            expm_tol: d.expm_tol,
            g_tol: d.g_tol,
            e_tol: d.e_tol,
            max_cycles: d.max_cycles,
            max_spaces: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcConfig {
    pub level_shift: f64,
    pub diis_depth: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for CcConfig {
    fn default() -> Self {
        let d = CcOptions::default();
        Self {
            level_shift: d.level_shift,
            diis_depth: d.diis_depth,
            tol: d.tol,
            max_iterations: d.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdConfig {
    pub dimension_limit: usize,
    pub dense_threshold: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        let d = DiagOptions::default();
        Self {
            dimension_limit: d.dimension_limit,
            dense_threshold: d.dense_threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Where report files go; nothing is written when unset.
    pub dir: Option<PathBuf>,
    /// Also write per-cycle and per-iteration CSV traces.
    pub trace: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    pub system: SystemConfig,
    pub cas: CasConfig,
    pub qflow: QflowConfig,
    pub cc: CcConfig,
    pub ed: EdConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Read a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut cfg.system.geometry);
        fix(&mut cfg.system.basis);
        fix(&mut cfg.system.fcidump);
        fix(&mut cfg.output.dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        let sources = [s.chain.is_some(), s.geometry.is_some(), s.fcidump.is_some()];
        if !self.methods.is_empty() && sources.iter().filter(|&&x| x).count() != 1 {
            return Err(Error::Config(
                "give exactly one of system.chain, system.geometry or system.fcidump".into(),
            ));
        }
        if let Some(c) = s.chain {
            if c.atoms == 0 || !(c.spacing > 0.0) {
                return Err(Error::Config("chain needs at least one atom and a positive spacing".into()));
            }
        }
        if s.fcidump.is_some() && s.basis.is_some() {
            return Err(Error::Config("system.basis has no effect with system.fcidump".into()));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let q = &self.qflow;
        if !positive(q.step) || !positive(q.expm_tol) || !positive(q.g_tol) || !positive(q.e_tol) {
            return Err(Error::Config("qflow step and tolerances must be positive".into()));
        }
        if q.shift < 0.0 || !q.shift.is_finite() {
            return Err(Error::Config("qflow shift must be non-negative".into()));
        }
        if q.trotter_order == 0 {
            return Err(Error::Config("trotter_order must be at least 1".into()));
        }
        if !positive(self.cc.tol) || !self.cc.level_shift.is_finite() {
            return Err(Error::Config("cc tolerance must be positive".into()));
        }
        if self.cas.n_occ_act == 0 || self.cas.n_virt_act == 0 {
            return Err(Error::Config("active spaces need occupied and virtual orbitals".into()));
        }
        Ok(())
    }

    pub fn flow_config(&self) -> FlowConfig {
        let q = &self.qflow;
        FlowConfig {
            n_occ_act: self.cas.n_occ_act,
            n_virt_act: self.cas.n_virt_act,
            space_limit: q.max_spaces,
            step: match q.step_policy {
                StepKind::SteepestDescent => CoreStep::SteepestDescent { step: q.step },
                StepKind::Preconditioned => CoreStep::Preconditioned {
                    step: q.step,
                    shift: q.shift,
                },
            },
            sweep: match q.sweep {
                SweepKind::GaussSeidel => CoreSweep::GaussSeidel,
                SweepKind::Jacobi => CoreSweep::Jacobi,
            },
            trotter_order: q.trotter_order,
            expm_tol: q.expm_tol,
            g_tol: q.g_tol,
            e_tol: q.e_tol,
            max_cycles: q.max_cycles,
        }
    }

    pub fn cc_options(&self) -> CcOptions {
        CcOptions {
            level_shift: self.cc.level_shift,
            diis_depth: self.cc.diis_depth,
            tol: self.cc.tol,
            max_iterations: self.cc.max_iterations,
        }
    }

    pub fn diag_options(&self) -> DiagOptions {
        DiagOptions {
            dimension_limit: self.ed.dimension_limit,
            dense_threshold: self.ed.dense_threshold,
            ..DiagOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_document() {
        let cfg = RunConfig::parse(
            r#"
methods = ["hf", "cas_ed", "qflow"]

[system]
chain = { atoms = 6, spacing = 2.0 }

[qflow]
step_policy = "preconditioned"
step = 1.0
sweep = "jacobi"

[output]
dir = "out"
trace = true
"#,
        )
        .unwrap();
        assert_eq!(cfg.methods, [Method::Hf, Method::CasEd, Method::Qflow]);
        assert_eq!(cfg.system.chain, Some(Chain { atoms: 6, spacing: 2.0 }));
        let flow = cfg.flow_config();
        assert_eq!(flow.step, CoreStep::Preconditioned { step: 1.0, shift: 0.0 });
        assert_eq!(flow.sweep, CoreSweep::Jacobi);
        assert_eq!(flow.g_tol, 1e-6);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknowns_and_conflicts() {
        assert!(RunConfig::parse("methods = [\"mp2\"]").is_err());
        assert!(RunConfig::parse("[qflow]\nstep_size = 1").is_err());
        let two_sources = RunConfig::parse(
            "methods = [\"hf\"]\n[system]\nchain = { atoms = 2, spacing = 1.4 }\nfcidump = \"x\"\n",
        )
        .unwrap();
        assert!(two_sources.validate().is_err());
        let bad_tol = RunConfig::parse("[qflow]\ng_tol = 0.0\n").unwrap();
        assert!(bad_tol.validate().is_err());
    }

    #[test]
    fn empty_config_is_valid() {
        let cfg = RunConfig::parse("").unwrap();
        assert!(cfg.methods.is_empty());
        cfg.validate().unwrap();
    }

    #[test]
    fn method_names() {
        assert_eq!("CAS-ED".parse::<Method>().unwrap(), Method::CasEd);
        assert_eq!("cased".parse::<Method>().unwrap(), Method::CasEd);
        assert_eq!(Method::Qflow.label(&CasConfig::default()), "QFlow(4e,4o)");
        let mut sorted = vec![Method::Ed, Method::Qflow, Method::Hf];
        sorted.sort();
        assert_eq!(sorted, [Method::Hf, Method::Qflow, Method::Ed]);
    }
}
