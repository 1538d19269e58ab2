use std::path::{Path, PathBuf};

use ucc_lab::config::ExperimentConfig;
use ucc_lab::{experiment, fixtures};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn config(out: &Path) -> ExperimentConfig {
    let body = format!(
        "output = {:?}\n[fixtures]\nmanifest = {:?}\nmolecule = \"h4\"\nr = [1.0, 2.0]\n[ansatz]\nkind = \"uccsd\"\n[ordering]\nmembers = 4\nseed = 11\n[scan]\nsgo = true\n",
        out.to_str().unwrap(),
        fixtures_dir().join("manifest.json").to_str().unwrap()
    );
    ExperimentConfig::from_toml(&body).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical_except_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let cfg = config(&tmp.path().join(name));
        let scan = experiment::run_scan(fixtures::resolve(&cfg.fixtures).unwrap(), &cfg).unwrap();
        experiment::write_scan(&cfg.output, &scan).unwrap();
        runs.push(files(&cfg.output));
    }
    assert_eq!(runs[0].len(), runs[1].len());
    for ((na, ba), (nb, bb)) in runs[0].iter().zip(&runs[1]) {
        assert_eq!(na, nb);
        if na != "timings.csv" {
            assert!(ba == bb, "{na} differs");
        }
    }
}

#[test]
fn recorded_orderings_replay_to_their_energies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let fx = fixtures::resolve(&cfg.fixtures).unwrap().pop().unwrap();
    let prep = experiment::prepare(fx, &cfg.ansatz).unwrap();
    let rec = experiment::run_ensemble(&prep, &cfg).unwrap();
    experiment::write_ensemble(tmp.path(), &rec).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("ensemble_r2.0000.json")).unwrap();
    let loaded: experiment::EnsembleRecord = serde_json::from_str(&text).unwrap();
    for m in &loaded.members {
        let e = experiment::replay_member(&prep, m, &cfg).unwrap();
        assert!((e - m.result.energy).abs() < 1e-10);
    }
}

#[test]
fn ensemble_record_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path());
    let fx = fixtures::resolve(&cfg.fixtures).unwrap().remove(0);
    let prep = experiment::prepare(fx, &cfg.ansatz).unwrap();
    let rec = experiment::run_ensemble(&prep, &cfg).unwrap();
    assert_eq!(rec.members.len(), cfg.ordering.members);
    assert_eq!(rec.summary.range, rec.summary.max - rec.summary.min);
    assert_eq!(rec.members.iter().map(|m| m.seed).collect::<Vec<_>>(), vec![11, 12, 13, 14]);
    for m in &rec.members {
        assert!(m.result.energy >= prep.fci_energy - 1e-9);
    }
}
