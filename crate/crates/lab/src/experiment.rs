//! Ensembles, scans and their on-disk records.
//!
//! Every numeric output is a function of the config and the fixture bytes.
//! Wall times go to `timings.csv` only.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ucc_ordering::units::HARTREE_TO_KCAL_PER_MOL;
use ucc_ordering::{
    dissociation_reference, fci_ground_energy, kupccgsd_pool, order_program, sector_basis, set_trotter_number,
    sgo_ordering, uccsd_pool, AnsatzProgram, Form, Pool, ProgramDocument, SgoOptions, VqeProblem, VqeResult,
};

use crate::config::{AnsatzKind, AnsatzSpec, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::fixtures::Fixture;
use crate::stats::{KcalSummary, Summary};

/// Allowed dip below FCI before an energy counts as a variational violation.
pub const VARIATIONAL_TOL: f64 = 1e-9;

/// A geometry with its Hamiltonian, pool and exact energy.
pub struct Prepared {
    pub fixture: Fixture,
    pub problem: VqeProblem,
    pub pool: Arc<Pool>,
    pub fci_energy: f64,
}

pub fn build_pool(fixture: &Fixture, ansatz: &AnsatzSpec) -> Result<Pool> {
    let ints = &fixture.integrals;
    let (a, b) = ints.n_alpha_beta();
    Ok(match ansatz.kind {
        AnsatzKind::Uccsd => uccsd_pool(ints.n_spatial, a, b)?,
        AnsatzKind::Kupccgsd => kupccgsd_pool(ints.n_spatial, ansatz.k)?,
    })
}

pub fn prepare(fixture: Fixture, ansatz: &AnsatzSpec) -> Result<Prepared> {
    let problem = VqeProblem::from_integrals(&fixture.integrals)?;
    let (a, b) = fixture.integrals.n_alpha_beta();
    let basis = sector_basis(problem.n_qubits(), a, b)?;
    let fci_energy = fci_ground_energy(problem.hamiltonian(), &basis)?.energy;
    let pool = Arc::new(build_pool(&fixture, ansatz)?);
    Ok(Prepared {
        fixture,
        problem,
        pool,
        fci_energy,
    })
}

/// The program a config asks for, ordered by `seed` when Trotterized.
pub fn build_program(pool: Arc<Pool>, cfg: &ExperimentConfig, seed: u64) -> Result<AnsatzProgram> {
    match cfg.ansatz.form {
        Form::Untrotterized => Ok(AnsatzProgram::untrotterized(pool)?),
        Form::Trotterized => {
            let p = order_program(pool, cfg.ordering.strategy.with_seed(seed))?;
            Ok(set_trotter_number(&p, cfg.ansatz.trotter_n)?)
        }
    }
}

/// Best-of-restarts optimization of one program.
pub fn optimize(prep: &Prepared, program: &AnsatzProgram, cfg: &ExperimentConfig) -> Result<VqeResult> {
    let r = &cfg.restarts;
    let out = prep
        .problem
        .optimize_with_restarts(program, r.count, r.init, r.seed, &cfg.optimizer)?;
    let best = out.best().clone();
    check_variational(prep, best.energy)?;
    Ok(best)
}

fn check_variational(prep: &Prepared, energy: f64) -> Result<()> {
    if energy < prep.fci_energy - VARIATIONAL_TOL {
        return Err(LabError::Numerical(format!(
            "energy {energy} lies below FCI {} at R = {}",
            prep.fci_energy, prep.fixture.r
        )));
    }
    Ok(())
}

/// Optimization result without its wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub energy: f64,
    pub error_kcal: f64,
    pub parameters: Vec<f64>,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub converged: bool,
    pub message: String,
}

impl Outcome {
    fn new(r: &VqeResult, fci: f64) -> Self {
        Self {
            energy: r.energy,
            error_kcal: (r.energy - fci) * HARTREE_TO_KCAL_PER_MOL,
            parameters: r.parameters.clone(),
            iterations: r.iterations,
            final_gradient_norm: r.final_gradient_norm,
            converged: r.converged,
            message: r.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub seed: u64,
    pub ordering: ProgramDocument,
    pub result: Outcome,
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub r_angstrom: f64,
    pub fixture_sha256: String,
    pub pool_ref: String,
    pub fci_energy: f64,
    pub members: Vec<MemberRecord>,
    pub summary: Summary,
    pub summary_kcal: KcalSummary,
    /// Summary of `energy − FCI` in kcal/mol.
    pub error_kcal: Summary,
}

impl EnsembleRecord {
    pub fn energies(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.result.energy).collect()
    }
}

pub fn run_ensemble(prep: &Prepared, cfg: &ExperimentConfig) -> Result<EnsembleRecord> {
    let seeds: Vec<u64> = cfg.ordering.member_seeds().collect();
    let members = seeds
        .par_iter()
        .map(|&seed| {
            let program = build_program(prep.pool.clone(), cfg, seed)?;
            let best = optimize(prep, &program, cfg)?;
            Ok(MemberRecord {
                seed,
                ordering: program.to_document(),
                result: Outcome::new(&best, prep.fci_energy),
                wall_time: best.wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = members.iter().map(|m| m.result.energy).collect();
    let errors: Vec<f64> = members.iter().map(|m| m.result.error_kcal).collect();
    let converged: Vec<bool> = members.iter().map(|m| m.result.converged).collect();
    let summary = Summary::from_values(&energies, &converged);
    Ok(EnsembleRecord {
        r_angstrom: prep.fixture.r,
        fixture_sha256: prep.fixture.sha256.clone(),
        pool_ref: prep.pool.pool_ref(),
        fci_energy: prep.fci_energy,
        summary_kcal: summary.kcal(),
        summary,
        error_kcal: Summary::from_values(&errors, &converged),
        members,
    })
}

/// Re-loads a member's ordering and re-runs its optimization.
pub fn replay_member(prep: &Prepared, member: &MemberRecord, cfg: &ExperimentConfig) -> Result<f64> {
    let program = AnsatzProgram::from_document(&member.ordering, Some(prep.pool.clone()))?;
    Ok(optimize(prep, &program, cfg)?.energy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgoRecord {
    pub ordering: ProgramDocument,
    pub result: Outcome,
    #[serde(skip)]
    pub wall_time: f64,
}

pub fn run_sgo(prep: &Prepared, cfg: &ExperimentConfig) -> Result<SgoRecord> {
    let opts = SgoOptions {
        reoptimize: cfg.sgo.reoptimize,
        vqe: cfg.optimizer,
    };
    let out = sgo_ordering(&prep.problem, prep.pool.clone(), &opts)?;
    check_variational(prep, out.result.energy)?;
    Ok(SgoRecord {
        ordering: out.program.to_document(),
        result: Outcome::new(&out.result, prep.fci_energy),
        wall_time: out.result.wall_time,
    })
}

/// One geometry of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r_angstrom: f64,
    pub fci_energy: f64,
    pub untrotterized: Option<Outcome>,
    pub ensemble: EnsembleRecord,
    pub sgo: Option<SgoRecord>,
    #[serde(skip)]
    pub untrotterized_wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub dissociation_reference: f64,
    pub points: Vec<ScanPoint>,
}

pub fn run_scan(fixtures: Vec<Fixture>, cfg: &ExperimentConfig) -> Result<ScanRecord> {
    let points = fixtures
        .into_par_iter()
        .map(|f| {
            let prep = prepare(f, &cfg.ansatz)?;
            let (untrotterized, untrotterized_wall_time) = if cfg.scan.untrotterized {
                let program = AnsatzProgram::untrotterized(prep.pool.clone())?;
                let best = optimize(&prep, &program, cfg)?;
                (Some(Outcome::new(&best, prep.fci_energy)), best.wall_time)
            } else {
                (None, 0.0)
            };
            let ensemble = run_ensemble(&prep, cfg)?;
            let sgo = if cfg.scan.sgo { Some(run_sgo(&prep, cfg)?) } else { None };
            Ok(ScanPoint {
                r_angstrom: prep.fixture.r,
                fci_energy: prep.fci_energy,
                untrotterized,
                ensemble,
                sgo,
                untrotterized_wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.r_angstrom, p.fci_energy)).collect();
    Ok(ScanRecord {
        dissociation_reference: dissociation_reference(&curve)?,
        points,
    })
}

/// Column names of `scan.csv`. Energies in Hartree; `*_rel_kcal` are
/// relative to the dissociation reference, `*_err_kcal` are errors vs FCI.
pub const SCAN_COLUMNS: [&str; 23] = [
    "r_angstrom",
    "fci",
    "untrotterized",
    "ensemble_mean",
    "ensemble_std",
    "ensemble_min",
    "ensemble_max",
    "ensemble_range",
    "ensemble_nonconverged",
    "sgo",
    "fci_rel_kcal",
    "untrotterized_rel_kcal",
    "ensemble_mean_rel_kcal",
    "ensemble_min_rel_kcal",
    "ensemble_max_rel_kcal",
    "sgo_rel_kcal",
    "untrotterized_err_kcal",
    "ensemble_mean_err_kcal",
    "ensemble_min_err_kcal",
    "ensemble_max_err_kcal",
    "ensemble_range_kcal",
    "sgo_err_kcal",
    "ensemble_n",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ScanRecord {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let k = HARTREE_TO_KCAL_PER_MOL;
        let d = self.dissociation_reference;
        self.points
            .iter()
            .map(|p| {
                let s = &p.ensemble.summary;
                let untrot = p.untrotterized.as_ref().map(|u| u.energy);
                let sgo = p.sgo.as_ref().map(|g| g.result.energy);
                let rel = |e: Option<f64>| e.map(|e| (e - d) * k);
                let err = |e: Option<f64>| e.map(|e| (e - p.fci_energy) * k);
                vec![
                    p.r_angstrom.to_string(),
                    p.fci_energy.to_string(),
                    cell(untrot),
                    s.mean.to_string(),
                    s.std.to_string(),
                    s.min.to_string(),
                    s.max.to_string(),
                    s.range.to_string(),
                    s.nonconverged.to_string(),
                    cell(sgo),
                    cell(rel(Some(p.fci_energy))),
                    cell(rel(untrot)),
                    cell(rel(Some(s.mean))),
                    cell(rel(Some(s.min))),
                    cell(rel(Some(s.max))),
                    cell(rel(sgo)),
                    cell(err(untrot)),
                    cell(err(Some(s.mean))),
                    cell(err(Some(s.min))),
                    cell(err(Some(s.max))),
                    cell(Some(s.range * k)),
                    cell(err(sgo)),
                    s.n.to_string(),
                ]
            })
            .collect()
    }
}

/// Per-geometry statistics rows, one per ensemble.
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "r_angstrom",
    "n",
    "mean",
    "std",
    "std_defined",
    "min",
    "max",
    "range",
    "nonconverged",
    "mean_err_kcal",
    "range_kcal",
    "fci",
];

pub fn summarize(records: &[EnsembleRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            let s = &r.summary;
            vec![
                r.r_angstrom.to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.std_defined.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                s.range.to_string(),
                s.nonconverged.to_string(),
                r.error_kcal.mean.to_string(),
                r.summary_kcal.range.to_string(),
                r.fci_energy.to_string(),
            ]
        })
        .collect()
}

pub const MEMBER_COLUMNS: [&str; 8] = [
    "r_angstrom",
    "seed",
    "energy",
    "error_kcal",
    "converged",
    "iterations",
    "final_gradient_norm",
    "ordering",
];

pub fn member_rows(record: &EnsembleRecord) -> Vec<Vec<String>> {
    record
        .members
        .iter()
        .map(|m| {
            let labels: Vec<String> = m.ordering.slots.iter().map(|s| format!("{}:{}", s.block, s.label)).collect();
            vec![
                record.r_angstrom.to_string(),
                m.seed.to_string(),
                m.result.energy.to_string(),
                m.result.error_kcal.to_string(),
                m.result.converged.to_string(),
                m.result.iterations.to_string(),
                m.result.final_gradient_norm.to_string(),
                labels.join(" "),
            ]
        })
        .collect()
}

/// Wall-time rows `(kind, r, seed, seconds)`.
pub fn timing_rows(points: &[ScanPoint]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for p in points {
        if p.untrotterized.is_some() {
            rows.push(vec!["untrotterized".into(), p.r_angstrom.to_string(), String::new(), p.untrotterized_wall_time.to_string()]);
        }
        rows.extend(ensemble_timing_rows(&p.ensemble));
        if let Some(g) = &p.sgo {
            rows.push(vec!["sgo".into(), p.r_angstrom.to_string(), String::new(), g.wall_time.to_string()]);
        }
    }
    rows
}

pub fn ensemble_timing_rows(e: &EnsembleRecord) -> Vec<Vec<String>> {
    e.members
        .iter()
        .map(|m| vec!["member".into(), e.r_angstrom.to_string(), m.seed.to_string(), m.wall_time.to_string()])
        .collect()
}

pub const TIMING_COLUMNS: [&str; 4] = ["kind", "r_angstrom", "seed", "seconds"];

/// Writes via a temporary file and rename so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes).map_err(|e| LabError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| LabError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Numerical(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| LabError::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::io(path, std::io::Error::other(e.to_string())))?;
    write_atomic(path, &bytes)
}

/// File-name tag of a bond length, e.g. `r2.0000`.
pub fn r_tag(r: f64) -> String {
    format!("r{r:.4}")
}

/// Writes an ensemble's JSON record, member CSV and timings into `dir`.
pub fn write_ensemble(dir: &Path, record: &EnsembleRecord) -> Result<()> {
    let tag = r_tag(record.r_angstrom);
    write_json(&dir.join(format!("ensemble_{tag}.json")), record)?;
    write_csv(&dir.join(format!("members_{tag}.csv")), &MEMBER_COLUMNS, &member_rows(record))?;
    write_csv(
        &dir.join(format!("timings_{tag}.csv")),
        &TIMING_COLUMNS,
        &ensemble_timing_rows(record),
    )
}

pub fn write_scan(dir: &Path, scan: &ScanRecord) -> Result<()> {
    write_json(&dir.join("scan.json"), scan)?;
    write_csv(&dir.join("scan.csv"), &SCAN_COLUMNS, &scan.csv_rows())?;
    let records: Vec<EnsembleRecord> = scan.points.iter().map(|p| p.ensemble.clone()).collect();
    write_summary(dir, &records)?;
    write_csv(&dir.join("timings.csv"), &TIMING_COLUMNS, &timing_rows(&scan.points))
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    r_angstrom: f64,
    fci_energy: f64,
    summary: &'a Summary,
    summary_kcal: &'a KcalSummary,
    error_kcal: &'a Summary,
}

/// `summary.csv` and `summary.json` over a set of ensembles.
pub fn write_summary(dir: &Path, records: &[EnsembleRecord]) -> Result<()> {
    let entries: Vec<SummaryEntry> = records
        .iter()
        .map(|r| SummaryEntry {
            r_angstrom: r.r_angstrom,
            fci_energy: r.fci_energy,
            summary: &r.summary,
            summary_kcal: &r.summary_kcal,
            error_kcal: &r.error_kcal,
        })
        .collect();
    write_json(&dir.join("summary.json"), &entries)?;
    write_csv(&dir.join("summary.csv"), &SUMMARY_COLUMNS, &summarize(records))
}
