use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qflow::config::{Chain, StepKind, SweepKind};
use qflow::fcidump::save_fcidump;
use qflow::pipeline::{ao_integrals, build_system, load_system_geometry};
use qflow::report::{table, write_outputs, Summary};
use qflow::{Error, Method, Result, RunConfig};

#[derive(Parser)]
#[command(name = "qflow", version, about = "Hydrogen-chain ground states: HF, ED, CAS-ED, CC and the QFlow active-space flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the methods listed in a config file (or --methods).
    Run(Overrides),
    /// Atomic-orbital integrals as JSON.
    Integrals(Overrides),
    /// Restricted Hartree-Fock.
    Scf(Overrides),
    /// Exact diagonalization in the full sector.
    Ed(Overrides),
    /// Exact diagonalization in the primary active space.
    Cased(Overrides),
    /// Rank-truncated coupled cluster.
    Cc {
        /// Highest excitation rank (2 = CCSD, 3 = CCSDT, 4 = CCSDTQ).
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// The QFlow active-space flow.
    Qflow(Overrides),
    /// Write the molecular-orbital Hamiltonian as an FCIDUMP file.
    FcidumpExport {
        /// Output file.
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run QFlow on integrals read from an FCIDUMP file.
    QflowFcidump {
        #[arg(value_name = "FCIDUMP")]
        file: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Combine summary.json files into one energy table.
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Print the table as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML run configuration; flags below override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Comma-separated methods: hf, cas_ed, ccsd, ccsdt, ccsdtq, qflow, ed.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Equally spaced hydrogen chain: atom count and spacing in bohr.
    #[arg(long, num_args = 2, value_names = ["N", "SPACING"])]
    chain: Option<Vec<f64>>,
    /// Geometry file with `Z x y z` lines in bohr.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Basis file (defaults to the bundled STO-3G).
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Take the Hamiltonian from an FCIDUMP file.
    #[arg(long)]
    fcidump: Option<PathBuf>,
    /// System name used in reports.
    #[arg(long)]
    label: Option<String>,
    /// Directory for report files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write per-cycle and per-iteration traces.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    n_occ_act: Option<usize>,
    #[arg(long)]
    n_virt_act: Option<usize>,
    #[arg(long, value_enum)]
    step_policy: Option<StepKind>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long, value_enum)]
    sweep: Option<SweepKind>,
    #[arg(long)]
    trotter_order: Option<usize>,
    #[arg(long)]
    expm_tol: Option<f64>,
    #[arg(long)]
    g_tol: Option<f64>,
    #[arg(long)]
    e_tol: Option<f64>,
    #[arg(long)]
    max_cycles: Option<usize>,
    /// Keep only the first N active spaces of the ordering.
    #[arg(long)]
    max_spaces: Option<usize>,
    #[arg(long)]
    cc_level_shift: Option<f64>,
    #[arg(long)]
    cc_diis_depth: Option<usize>,
    #[arg(long)]
    cc_tol: Option<f64>,
    #[arg(long)]
    cc_max_iterations: Option<usize>,
    #[arg(long)]
    ed_dense_threshold: Option<usize>,
    #[arg(long)]
    ed_dimension_limit: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(ms) = self.methods {
            cfg.methods = ms
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.parse())
                .collect::<Result<_>>()?;
        }
        let sys = &mut cfg.system;
        if let Some(c) = self.chain {
            let atoms = c[0];
            if atoms < 1.0 || atoms.fract() != 0.0 {
                return Err(Error::Config(format!("--chain atom count `{atoms}` is not a positive integer")));
            }
            sys.chain = Some(Chain {
                atoms: atoms as usize,
                spacing: c[1],
            });
            sys.geometry = None;
            sys.fcidump = None;
        }
        if self.geometry.is_some() {
            sys.chain = None;
            sys.fcidump = None;
            sys.geometry = self.geometry;
        }
        if self.fcidump.is_some() {
            sys.chain = None;
            sys.geometry = None;
            sys.fcidump = self.fcidump;
        }
        if self.basis.is_some() {
            sys.basis = self.basis;
        }
        if self.label.is_some() {
            sys.label = self.label;
        }
        if self.out_dir.is_some() {
            cfg.output.dir = self.out_dir;
        }
        cfg.output.trace |= self.trace;
        set(&mut cfg.cas.n_occ_act, self.n_occ_act);
        set(&mut cfg.cas.n_virt_act, self.n_virt_act);
        let q = &mut cfg.qflow;
        set(&mut q.step_policy, self.step_policy);
        set(&mut q.step, self.step);
        set(&mut q.shift, self.shift);
        set(&mut q.sweep, self.sweep);
        set(&mut q.trotter_order, self.trotter_order);
        set(&mut q.expm_tol, self.expm_tol);
        set(&mut q.g_tol, self.g_tol);
        set(&mut q.e_tol, self.e_tol);
        set(&mut q.max_cycles, self.max_cycles);
        if self.max_spaces.is_some() {
            q.max_spaces = self.max_spaces;
        }
        set(&mut cfg.cc.level_shift, self.cc_level_shift);
        set(&mut cfg.cc.diis_depth, self.cc_diis_depth);
        set(&mut cfg.cc.tol, self.cc_tol);
        set(&mut cfg.cc.max_iterations, self.cc_max_iterations);
        set(&mut cfg.ed.dense_threshold, self.ed_dense_threshold);
        set(&mut cfg.ed.dimension_limit, self.ed_dimension_limit);
        cfg.validate()?;
        Ok(cfg)
    }

    fn with_methods(self, methods: &[Method]) -> Result<RunConfig> {
        let mut cfg = self.resolve()?;
        cfg.methods = methods.to_vec();
        Ok(cfg)
    }
}

fn run_config(cfg: &RunConfig) -> Result<i32> {
    let Some(outcome) = qflow::run(cfg)? else {
        return Ok(0);
    };
    let summary = Summary::from_outcome(&outcome, cfg);
    print!("{}", table(std::slice::from_ref(&summary)).render());
    if let Some(q) = &summary.qflow {
        println!(
            "qflow: converged={} cycles={} spaces={} pool={} spread={:.4} mHartree",
            q.converged, q.cycles, q.n_spaces, q.pool_size, q.spread_mhartree
        );
    }
    for r in &outcome.results {
        if let Some(e) = &r.error {
            eprintln!("error: {e}");
        }
    }
    if let Some(dir) = &cfg.output.dir {
        write_outputs(&outcome, cfg, dir)?;
    }
    Ok(outcome.exit_code())
}

fn integrals(cfg: &RunConfig) -> Result<i32> {
    let geometry = load_system_geometry(&cfg.system)?;
    let ao = ao_integrals(&cfg.system, &geometry)?;
    let rows = |m: &qflow_core::nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    let eri: Vec<(usize, usize, usize, usize, f64)> =
        ao.eri.unique().map(|((i, j, k, l), v)| (i, j, k, l, v)).collect();
    let doc = serde_json::json!({
        "n_ao": ao.n_ao,
        "nuclear_repulsion": ao.e_nuc,
        "overlap": rows(&ao.overlap),
        "kinetic": rows(&ao.kinetic),
        "nuclear_attraction": rows(&ao.nuclear),
        "eri_unique": eri,
    });
    let text = serde_json::to_string_pretty(&doc).expect("integrals serialize") + "\n";
    match &cfg.output.dir {
        Some(dir) => write_file(&dir.join("integrals.json"), &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn report(paths: &[PathBuf], json: bool) -> Result<i32> {
    let summaries = paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            Summary::from_json(&text)
        })
        .collect::<Result<Vec<_>>>()?;
    let t = table(&summaries);
    print!("{}", if json { t.to_json() } else { t.render() });
    Ok(0)
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run(o) => run_config(&o.resolve()?),
        Command::Integrals(o) => integrals(&o.resolve()?),
        Command::Scf(o) => run_config(&o.with_methods(&[Method::Hf])?),
        Command::Ed(o) => run_config(&o.with_methods(&[Method::Hf, Method::Ed])?),
        Command::Cased(o) => run_config(&o.with_methods(&[Method::Hf, Method::CasEd])?),
        Command::Cc { rank, overrides } => {
            let m = match rank {
                2 => Method::Ccsd,
                3 => Method::Ccsdt,
                4 => Method::Ccsdtq,
                _ => return Err(Error::Config(format!("--rank {rank} not available (2, 3 or 4)"))),
            };
            run_config(&overrides.with_methods(&[Method::Hf, m])?)
        }
        Command::Qflow(o) => run_config(&o.with_methods(&[Method::Hf, Method::Qflow])?),
        Command::FcidumpExport { out, overrides } => {
            let mut cfg = overrides.resolve()?;
            cfg.methods = vec![Method::Hf];
            cfg.validate()?;
            let system = build_system(&cfg.system)?;
            save_fcidump(&system.hamiltonian, &out)?;
            Ok(0)
        }
        Command::QflowFcidump { file, mut overrides } => {
            overrides.fcidump = Some(file);
            overrides.chain = None;
            overrides.geometry = None;
            run_config(&overrides.with_methods(&[Method::Hf, Method::Qflow])?)
        }
        Command::Report { summaries, json } => report(&summaries, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
