//! `ucc-lab` command line.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use ucc_ordering::units::HARTREE_TO_KCAL_PER_MOL;
use ucc_ordering::{dissociation_reference, uccsd_pool, ProgramDocument};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiment::{self as exp, Outcome};
use crate::fixtures::{self, read_fixture, r_from_filename};
use crate::plot::{render_csv, PlotStyle};

#[derive(Debug, Parser)]
#[command(name = "ucc-lab", version, about = "Operator-ordering experiments for UCC ansätze")]
pub struct Cli {
    /// Overrides the ordering and restart seeds of the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize one FCIDUMP file.
    Inspect { fcidump: PathBuf },
    /// Exact sector energies for every geometry of a config.
    Fci { config: PathBuf },
    /// One ordering per geometry (the ordering seed).
    Vqe { config: PathBuf },
    /// Ordering ensemble per geometry.
    Ensemble { config: PathBuf },
    /// Full PES scan: FCI, un-Trotterized, ensemble and optional SGO.
    Scan { config: PathBuf },
    /// Sequential gradient ordering per geometry.
    Sgo { config: PathBuf },
    /// SVG charts from scan or summary CSV files.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value = "")]
        title: String,
    },
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: &Path, cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.ordering.seed = seed;
        cfg.restarts.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(LabError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Inspect { fcidump } => inspect(fcidump),
        Command::Fci { config } => fci(&load_config(config, &cli)?),
        Command::Vqe { config } => vqe(&load_config(config, &cli)?),
        Command::Ensemble { config } => ensemble(&load_config(config, &cli)?),
        Command::Scan { config } => scan(&load_config(config, &cli)?),
        Command::Sgo { config } => sgo(&load_config(config, &cli)?),
        Command::Plot { csv, title } => plot(csv, title, cli.out.as_deref()),
    }
}

fn inspect(path: &Path) -> Result<()> {
    let f = read_fixture(path, r_from_filename(path).unwrap_or(f64::NAN))?;
    let ints = &f.integrals;
    let (a, b) = ints.n_alpha_beta();
    println!("file          {}", path.display());
    println!("sha256        {}", f.sha256);
    if f.r.is_finite() {
        println!("r_angstrom    {}", f.r);
    }
    println!("n_spatial     {}", ints.n_spatial);
    println!("n_qubits      {}", ints.n_qubits());
    println!("n_electrons   {} ({a} alpha, {b} beta)", ints.n_electrons);
    println!("core_energy   {}", ints.core_energy);
    let problem = ucc_ordering::VqeProblem::from_integrals(ints)?;
    let e_ref = problem.operator().expectation(problem.reference())?;
    println!("reference     {e_ref}");
    println!("pauli_terms   {}", problem.hamiltonian().len());
    println!("uccsd_pool    {}", uccsd_pool(ints.n_spatial, a, b)?.len());
    Ok(())
}

fn fci(cfg: &ExperimentConfig) -> Result<()> {
    let fx = fixtures::resolve(&cfg.fixtures)?;
    let preps = fx
        .into_iter()
        .map(|f| exp::prepare(f, &cfg.ansatz))
        .collect::<Result<Vec<_>>>()?;
    let curve: Vec<(f64, f64)> = preps.iter().map(|p| (p.fixture.r, p.fci_energy)).collect();
    let d = dissociation_reference(&curve)?;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|&(r, e)| vec![r.to_string(), e.to_string(), ((e - d) * HARTREE_TO_KCAL_PER_MOL).to_string()])
        .collect();
    for row in &rows {
        println!("{}", row.join("\t"));
    }
    exp::write_csv(&cfg.output.join("fci.csv"), &["r_angstrom", "fci", "fci_rel_kcal"], &rows)
}

#[derive(Serialize)]
struct VqeEntry {
    r_angstrom: f64,
    fci_energy: f64,
    ordering: ProgramDocument,
    result: Outcome,
}

fn vqe(cfg: &ExperimentConfig) -> Result<()> {
    let mut single = cfg.clone();
    single.ordering.members = 1;
    let mut entries = Vec::new();
    for f in fixtures::resolve(&cfg.fixtures)? {
        let prep = exp::prepare(f, &cfg.ansatz)?;
        let rec = exp::run_ensemble(&prep, &single)?;
        let m = rec.members.into_iter().next().expect("one member");
        println!(
            "R = {:.4}  E = {:.10}  error = {:.4} kcal/mol  converged = {}",
            prep.fixture.r, m.result.energy, m.result.error_kcal, m.result.converged
        );
        entries.push(VqeEntry {
            r_angstrom: prep.fixture.r,
            fci_energy: prep.fci_energy,
            ordering: m.ordering,
            result: m.result,
        });
    }
    exp::write_json(&cfg.output.join("vqe.json"), &entries)
}

fn ensemble(cfg: &ExperimentConfig) -> Result<()> {
    let mut records = Vec::new();
    for f in fixtures::resolve(&cfg.fixtures)? {
        let prep = exp::prepare(f, &cfg.ansatz)?;
        let rec = exp::run_ensemble(&prep, cfg)?;
        let k = rec.error_kcal.clone();
        println!(
            "R = {:.4}  n = {}  error mean {:.4} min {:.4} max {:.4} range {:.4} kcal/mol  nonconverged {}",
            rec.r_angstrom, k.n, k.mean, k.min, k.max, k.range, k.nonconverged
        );
        exp::write_ensemble(&cfg.output, &rec)?;
        records.push(rec);
    }
    exp::write_summary(&cfg.output, &records)
}

fn scan(cfg: &ExperimentConfig) -> Result<()> {
    let rec = exp::run_scan(fixtures::resolve(&cfg.fixtures)?, cfg)?;
    for row in rec.csv_rows() {
        println!("{}", row.join(","));
    }
    exp::write_scan(&cfg.output, &rec)
}

fn sgo(cfg: &ExperimentConfig) -> Result<()> {
    for f in fixtures::resolve(&cfg.fixtures)? {
        let prep = exp::prepare(f, &cfg.ansatz)?;
        let rec = exp::run_sgo(&prep, cfg)?;
        println!(
            "R = {:.4}  E = {:.10}  error = {:.4} kcal/mol  first = {}",
            prep.fixture.r,
            rec.result.energy,
            rec.result.error_kcal,
            rec.ordering.slots.first().map(|s| s.label.as_str()).unwrap_or("")
        );
        exp::write_json(&cfg.output.join(format!("sgo_{}.json", exp::r_tag(prep.fixture.r))), &rec)?;
    }
    Ok(())
}

fn plot(csvs: &[PathBuf], title: &str, out: Option<&Path>) -> Result<()> {
    let style = PlotStyle {
        title: title.to_string(),
        ..PlotStyle::default()
    };
    for path in csvs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let rendered = render_csv(&text, &style).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        for w in &rendered.warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
        let name = path.with_extension("svg");
        let target = match out {
            Some(dir) => dir.join(name.file_name().expect("csv path has a file name")),
            None => name,
        };
        exp::write_atomic(&target, rendered.svg.as_bytes())?;
        println!("{}", target.display());
    }
    Ok(())
}
