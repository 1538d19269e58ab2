use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucc-lab")).args(args).output().unwrap()
}

fn h2_config(dir: &Path, extra: &str) -> PathBuf {
    let body = format!(
        "output = \"out\"\n[fixtures]\nmanifest = {:?}\nmolecule = \"h2\"\nr = [0.7414, 2.5]\n[ansatz]\nkind = \"uccsd\"\n[ordering]\nmembers = 3\n{extra}",
        fixtures_dir().join("manifest.json").to_str().unwrap()
    );
    let path = dir.join("h2.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn inspect_reports_sizes() {
    let f = fixtures_dir().join("h2/h2_r0.7414.fcidump");
    let out = lab(&["inspect", f.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n_qubits      4"));
    assert!(text.contains("uccsd_pool    3"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = h2_config(dir.path(), "[scan]\nunknown_key = 1\n");
    assert_eq!(lab(&["scan", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lab(&["scan", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn fixture_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = h2_config(dir.path(), "").to_str().unwrap().to_string();
    std::fs::write(&cfg, std::fs::read_to_string(&cfg).unwrap().replace("2.5]", "2.55]")).unwrap();
    let out = lab(&["fci", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("2.55"));
    let f = dir.path().join("bad_r1.0.fcidump");
    std::fs::write(&f, "&FCI NORB=2 &END\n").unwrap();
    assert_eq!(lab(&["inspect", f.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn numerical_failures_exit_with_4() {
    // a valid FCIDUMP whose (4α, 4β) sector exceeds the dense FCI limit
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("big_r1.0.fcidump");
    std::fs::write(&f, "&FCI NORB=9,NELEC=8,MS2=0 &END\n 1.0 1 1 0 0\n 0.0 0 0 0 0\n").unwrap();
    let cfg = dir.path().join("big.toml");
    std::fs::write(
        &cfg,
        format!("[fixtures]\nfiles = [{:?}]\n[ansatz]\nkind = \"uccsd\"\n", f.to_str().unwrap()),
    )
    .unwrap();
    assert_eq!(lab(&["fci", cfg.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn scan_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = h2_config(dir.path(), "[scan]\nsgo = true\n");
    let out = lab(&["scan", cfg.to_str().unwrap(), "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    for name in ["scan.csv", "scan.json", "summary.csv", "summary.json", "timings.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(out_dir.join("scan.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    let header: Vec<&str> = rows[0].split(',').collect();
    let last: Vec<&str> = rows[2].split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    // the largest R is the dissociation reference
    assert_eq!(last[col("fci_rel_kcal")].parse::<f64>().unwrap(), 0.0);
    // H2 UCCSD is exact
    assert!(last[col("ensemble_max_err_kcal")].parse::<f64>().unwrap().abs() < 1e-6);

    let scan_csv = out_dir.join("scan.csv");
    let plot = lab(&["plot", scan_csv.to_str().unwrap(), "--title", "H2"]);
    assert!(plot.status.success());
    let svg = std::fs::read_to_string(out_dir.join("scan.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn empty_plot_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "r_angstrom,fci_rel_kcal\n").unwrap();
    let out = lab(&["plot", csv.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
    assert!(dir.path().join("empty.svg").exists());
    std::fs::write(&csv, "r_angstrom,fci_rel_kcal\n1.0,x\n").unwrap();
    assert_eq!(lab(&["plot", csv.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = h2_config(dir.path(), "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (seed, out) in [("5", &a), ("6", &b)] {
        let o = lab(&["ensemble", cfg.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let ja: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("ensemble_r0.7414.json")).unwrap()).unwrap();
    let jb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("ensemble_r0.7414.json")).unwrap()).unwrap();
    assert_eq!(ja["members"][0]["seed"], 5);
    assert_eq!(jb["members"][0]["seed"], 6);
    assert_eq!(ja["members"][1]["ordering"], jb["members"][0]["ordering"]);
}
