//! End-to-end acceptance run: the four benchmark chains through every
//! method, plus counting, dynamics, property and interchange checks.
//! Prints one PASS/FAIL line per criterion and exits non-zero on failure.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qflow::fcidump::{parse_fcidump, save_fcidump, write_fcidump};
use qflow::pipeline::{qflow_from_fcidump, Details};
use qflow::{Method, RunConfig, RunOutcome};
use qflow_core::ccbaseline::cc_solve;
use qflow_core::fockspace::{expm_action, ExcitationSignature, ExpmOptions, GeneratorMatrix, SectorBasis};
use qflow_core::hamiltonian::{mo_transform, rhf_solve, MoHamiltonian};
use qflow_core::linalg::{dot, norm};
use qflow_core::molint::{build_ao_integrals, chain_geometry, sto3g_hydrogen};
use qflow_core::qflow::{
    build_pool, enumerate_active_spaces, partition_pool, qflow_run, FlowConfig, FlowContext, FlowReport, StepPolicy,
};
use qflow_core::spectra::{cas_ed, exact_diag, CasBasis};

const SYSTEMS: [(usize, f64); 4] = [(6, 2.0), (6, 3.0), (8, 2.0), (8, 3.0)];

/// Printed energies, rows in `Method::ALL` order, columns in `SYSTEMS` order.
const TABLE: [[f64; 4]; 7] = [
    [-3.1059, -2.6754, -4.1382, -3.5723],
    [-3.1669, -2.8021, -4.1906, -3.6656],
    [-3.2173, -2.9673, -4.2848, -3.9727],
    [-3.2180, -2.9692, -4.2867, -3.9784],
    [-3.2177, -2.9574, -4.2860, -3.9439],
    [-3.2173, -2.9521, -4.2847, -3.9322],
    [-3.2177, -2.9576, -4.2860, -3.9447],
];

type Checks = Vec<(bool, String)>;

fn check(out: &mut Checks, ok: bool, what: String) {
    out.push((ok, what));
}

fn run_config(n: usize, r: f64) -> RunConfig {
    RunConfig::parse(&format!(
        "methods = [\"hf\", \"cas_ed\", \"ccsd\", \"ccsdt\", \"ccsdtq\", \"qflow\", \"ed\"]\n\
         [system]\nchain = {{ atoms = {n}, spacing = {r:.1} }}\n\
         [qflow]\nstep_policy = \"preconditioned\"\nstep = 1.0\n"
    ))
    .unwrap()
}

fn chain(n: usize, r: f64) -> MoHamiltonian {
    let g = chain_geometry(n, r).unwrap();
    let ao = build_ao_integrals(&g, &sto3g_hydrogen().basis_for(&g).unwrap()).unwrap();
    let scf = rhf_solve(&ao, n).unwrap();
    mo_transform(&ao, &scf).unwrap()
}

fn flow_of(o: &RunOutcome) -> &FlowReport {
    o.results
        .iter()
        .find_map(|r| match &r.details {
            Details::Flow(f) => Some(f.as_ref()),
            _ => None,
        })
        .expect("qflow ran")
}

fn mh(x: f64) -> f64 {
    1e3 * x
}

fn table_reproduction(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    for (col, o) in runs.iter().enumerate() {
        for (row, m) in Method::ALL.iter().enumerate() {
            if *m == Method::Qflow {
                continue;
            }
            let e = o.energy(*m);
            let ok = e.is_some_and(|e| (e - TABLE[row][col]).abs() <= 5e-4);
            check(&mut out, ok, format!("{} {m}: {e:.6?} vs {:.4}", o.system.label, TABLE[row][col]));
        }
    }
    out
}

fn qflow_energies(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    for (col, o) in runs.iter().enumerate() {
        let f = flow_of(o);
        let ed = o.energy(Method::Ed).unwrap();
        let target = TABLE[5][col];
        let ok = f.converged && (f.e_primary - target).abs() <= 1.5e-3 && f.e_primary >= ed;
        check(
            &mut out,
            ok,
            format!(
                "{}: E(h1) {:.6} vs {target:.4} ({:+.2} mHartree), above ED by {:.2} mHartree, {} cycles",
                o.system.label,
                f.e_primary,
                mh(f.e_primary - target),
                mh(f.e_primary - ed),
                f.cycles
            ),
        );
    }
    out
}

fn error_reduction(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    let o = &runs[3];
    let (hf, cas, ed) = (o.energy(Method::Hf).unwrap(), o.energy(Method::CasEd).unwrap(), o.energy(Method::Ed).unwrap());
    let q = flow_of(o).e_primary;
    let cas_err = mh(cas - ed);
    check(&mut out, (cas_err - 279.0).abs() <= 1.0, format!("CAS-ED error {cas_err:.2} mHartree (279 +/- 1)"));
    let q_err = mh(q - ed);
    check(&mut out, q_err <= 15.0, format!("QFlow error {q_err:.2} mHartree (<= 15)"));
    let recovery = (q - hf) / (ed - hf);
    check(&mut out, recovery >= 0.96, format!("correlation recovery {recovery:.4} (>= 0.96)"));
    out
}

/// Union of CAS determinants over all spaces, read as excitations of the
/// reference.
fn pool_by_brute_force(h: &MoHamiltonian) -> BTreeSet<ExcitationSignature> {
    let spaces = enumerate_active_spaces(&h.orbital_energies(), h.n_occupied(), 2, 2).unwrap();
    let mut set = BTreeSet::new();
    for s in &spaces {
        let cas = CasBasis::for_hamiltonian(h, s).unwrap();
        for &d in cas.dets() {
            if d != cas.reference() {
                set.insert(ExcitationSignature::between(cas.reference(), d).unwrap());
            }
        }
    }
    set
}

fn counting() -> Checks {
    let mut out = Checks::new();
    let h6 = chain(6, 2.0);
    let h8 = chain(8, 3.0);
    let s6 = enumerate_active_spaces(&h6.orbital_energies(), 3, 2, 2).unwrap();
    let s8 = enumerate_active_spaces(&h8.orbital_energies(), 4, 2, 2).unwrap();
    check(&mut out, s6.len() == 9, format!("H6 active spaces: {}", s6.len()));
    check(&mut out, s8.len() == 36, format!("H8 active spaces: {}", s8.len()));
    let reference = SectorBasis::for_hamiltonian(&h8).unwrap().reference();
    let p8 = build_pool(&s8, reference);
    let rank4 = p8.count_by_rank().get(4).copied().unwrap_or(0);
    check(&mut out, p8.len() == 684, format!("H8 pool size: {}", p8.len()));
    check(&mut out, rank4 == 36, format!("H8 rank-4 signatures: {rank4}"));
    let most = s8.iter().map(|s| partition_pool(&p8, s).internal.len()).max().unwrap();
    check(&mut out, most <= 35, format!("largest internal block: {most}"));
    let p6 = build_pool(&s6, SectorBasis::for_hamiltonian(&h6).unwrap().reference());
    let oracle = pool_by_brute_force(&h6);
    let same = p6.signatures().iter().copied().collect::<BTreeSet<_>>() == oracle;
    check(&mut out, p6.len() == 198 && same, format!("H6 pool size {} vs enumeration {}", p6.len(), oracle.len()));
    out
}

fn dynamics(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    for o in runs {
        let f = flow_of(o);
        let hf = o.energy(Method::Hf).unwrap();
        let dev = f.trace[0].iter().map(|e| (e - hf).abs()).fold(0.0, f64::max);
        check(&mut out, dev <= 1e-10, format!("{}: first cycle vs HF {dev:.1e}", o.system.label));
    }
    let f = flow_of(&runs[3]);
    check(&mut out, mh(f.spread) < 2.0, format!("H8 (3.0 a.u.) converged spread {:.3} mHartree", mh(f.spread)));
    out
}

fn properties(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    let tol = 1e-12;

    // exponential of the anti-Hermitian pool generator on the H6 sector
    let h6 = chain(6, 2.0);
    let basis = SectorBasis::for_hamiltonian(&h6).unwrap();
    let spaces = enumerate_active_spaces(&h6.orbital_energies(), 3, 2, 2).unwrap();
    let pool = build_pool(&spaces, basis.reference());
    let gen = GeneratorMatrix::new(basis.dets(), pool.signatures(), true);
    let opts = ExpmOptions { tol, ..ExpmOptions::default() };
    let mut worst: f64 = 0.0;
    for seed in 0..4 {
        let amps: Vec<f64> = (0..pool.len()).map(|k| 0.15 * ((k * 7 + seed * 13) as f64 * 0.61).sin()).collect();
        let u: Vec<f64> = (0..basis.len()).map(|i| ((i + seed) as f64 * 0.37).cos()).collect();
        let w: Vec<f64> = (0..basis.len()).map(|i| ((i * 3 + seed) as f64 * 0.11).sin()).collect();
        let eu = expm_action(&gen.bind(&amps, 1.0), &u, &opts).unwrap();
        let ew = expm_action(&gen.bind(&amps, 1.0), &w, &opts).unwrap();
        let back = expm_action(&gen.bind(&amps, -1.0), &eu, &opts).unwrap();
        let nu = norm(&u);
        worst = worst
            .max((norm(&eu) - nu).abs() / nu)
            .max((dot(&eu, &ew) - dot(&u, &w)).abs() / (nu * norm(&w)))
            .max(back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / nu);
    }
    check(&mut out, worst <= 10.0 * tol, format!("exponential unitarity/inverse: {worst:.1e}"));

    // every effective Hamiltonian at the converged H6 pools
    let mut asym: f64 = 0.0;
    for (o, h) in [(&runs[0], &h6), (&runs[1], &chain(6, 3.0))] {
        let cfg = run_config(6, 2.0).flow_config();
        let ctx = FlowContext::new(h, &cfg).unwrap();
        let values = flow_of(o).pool.values();
        for i in 0..ctx.n_spaces() {
            asym = asym.max(ctx.effective_hamiltonian(i, &values).unwrap().asymmetry);
        }
    }
    check(&mut out, asym <= 100.0 * tol, format!("effective Hamiltonian asymmetry: {asym:.1e}"));

    // commutator gradient against central differences at the origin
    let ctx = FlowContext::new(&h6, &FlowConfig::default()).unwrap();
    let zeros = vec![0.0; ctx.pool_template().len()];
    let d = 1e-5;
    let mut fd_err: f64 = 0.0;
    for i in 0..ctx.n_spaces() {
        let g = ctx.evaluate(i, &zeros, true).unwrap().gradient;
        for (j, &k) in ctx.owned(i).iter().enumerate() {
            let (mut p, mut m) = (zeros.clone(), zeros.clone());
            p[k] = d;
            m[k] = -d;
            let fd = (ctx.evaluate(i, &p, false).unwrap().energy - ctx.evaluate(i, &m, false).unwrap().energy) / (2.0 * d);
            fd_err = fd_err.max((fd - g[j]).abs());
        }
    }
    check(&mut out, fd_err <= 1e-8, format!("gradient vs finite difference: {fd_err:.1e}"));

    // single space, so nothing is external
    for (n, r) in [(4, 2.0), (6, 3.0)] {
        let h = chain(n, r);
        let cfg = FlowConfig {
            space_limit: Some(1),
            step: StepPolicy::Preconditioned { step: 1.0, shift: 0.0 },
            ..FlowConfig::default()
        };
        let f = qflow_run(&h, &cfg).unwrap();
        let cas = cas_ed(&h, &CasBasis::for_hamiltonian(&h, &f.spaces[0]).unwrap()).unwrap().energy;
        let err = (f.e_primary - cas).abs();
        check(&mut out, f.converged && err <= 1e-6, format!("H{n} ({r:.1}) single-space flow vs CAS-ED: {err:.1e}"));
    }

    let h4 = chain(4, 2.0);
    let full = cc_solve(&h4, 4).unwrap().energy;
    let err = (full - exact_diag(&h4).unwrap().energy).abs();
    check(&mut out, err <= 1e-8, format!("H4 full-rank CC vs ED: {err:.1e}"));

    for o in [&runs[1], &runs[3]] {
        let (cc, ed) = (o.energy(Method::Ccsd).unwrap(), o.energy(Method::Ed).unwrap());
        check(&mut out, cc < ed, format!("{}: CCSD below ED by {:.2} mHartree", o.system.label, mh(ed - cc)));
    }
    out
}

fn interchange(runs: &[RunOutcome]) -> Checks {
    let mut out = Checks::new();
    for (n, r) in [(6, 2.0), (8, 2.0)] {
        let h = chain(n, r);
        let (_, back) = parse_fcidump(&write_fcidump(&h), "roundtrip").unwrap();
        let mut err = (back.core_energy() - h.core_energy()).abs();
        err = err.max((back.h_spatial() - h.h_spatial()).amax());
        for ((i, j, k, l), v) in h.eri_spatial().unique() {
            err = err.max((back.eri_spatial().get(i, j, k, l) - v).abs());
        }
        for ((i, j, k, l), v) in back.eri_spatial().unique() {
            err = err.max((h.eri_spatial().get(i, j, k, l) - v).abs());
        }
        check(&mut out, err <= 1e-12, format!("H{n} ({r:.1}) FCIDUMP round trip: {err:.1e}"));
    }

    let o = &runs[2];
    let dir = std::env::temp_dir().join(format!("qflow-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("h8.fcidump");
    save_fcidump(&o.system.hamiltonian, &path).unwrap();
    let cfg = run_config(8, 2.0).flow_config();
    let from_file = qflow_from_fcidump(&path, &cfg);
    std::fs::remove_dir_all(&dir).ok();
    let from_file = from_file.unwrap();
    let diff = (from_file.e_primary - flow_of(o).e_primary).abs();
    check(&mut out, diff <= 1e-10, format!("H8 (2.0) flow from FCIDUMP vs in memory: {diff:.1e}"));
    out
}

fn report(id: usize, title: &str, f: impl FnOnce() -> Checks) -> bool {
    let start = Instant::now();
    let checks = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(c) => c,
        Err(_) => vec![(false, "panicked".to_string())],
    };
    let ok = !checks.is_empty() && checks.iter().all(|(ok, _)| *ok);
    for (pass, what) in &checks {
        println!("    [{}] {what}", if *pass { "ok" } else { "FAILED" });
    }
    println!(
        "{} criterion {id}: {title} ({:.1} s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    ok
}

fn main() {
    // `cargo test -- --list` and filters: this target has a single entry
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let runs: Vec<RunOutcome> = SYSTEMS
        .iter()
        .map(|&(n, r)| qflow::run(&run_config(n, r)).unwrap().unwrap())
        .collect();
    println!("benchmark tables computed in {:.1} s", start.elapsed().as_secs_f64());

    let results = [
        report(1, "benchmark baselines within 0.5 mHartree", || table_reproduction(&runs)),
        report(2, "QFlow(4e,4o) within 1.5 mHartree and above ED", || qflow_energies(&runs)),
        report(3, "H8 (3.0 a.u.) error reduction", || error_reduction(&runs)),
        report(4, "active-space and pool counts", counting),
        report(5, "flow dynamics", || dynamics(&runs)),
        report(6, "property suites", || properties(&runs)),
        report(7, "FCIDUMP interchange", || interchange(&runs)),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
