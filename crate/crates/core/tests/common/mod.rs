#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;
use ucc_ordering::{parse_fcidump, MolecularIntegrals, PauliString, PauliSum};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn manifest() -> Value {
    let text = std::fs::read_to_string(fixtures_dir().join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub struct FixturePoint {
    pub r: f64,
    pub file: String,
    pub rhf_energy: f64,
    pub fci_energy: f64,
}

pub fn points(molecule: &str) -> Vec<FixturePoint> {
    let m = manifest();
    let mol = m["molecules"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["molecule"] == molecule)
        .unwrap()
        .clone();
    mol["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| FixturePoint {
            r: p["r_angstrom"].as_f64().unwrap(),
            file: p["file"].as_str().unwrap().to_string(),
            rhf_energy: p["rhf_energy"].as_f64().unwrap(),
            fci_energy: p["fci_energy"].as_f64().unwrap(),
        })
        .collect()
}

pub fn point(molecule: &str, r: f64) -> FixturePoint {
    points(molecule)
        .into_iter()
        .find(|p| (p.r - r).abs() < 1e-9)
        .unwrap_or_else(|| panic!("no {molecule} fixture at {r}"))
}

pub fn load(molecule: &str, r: f64) -> MolecularIntegrals {
    let p = point(molecule, r);
    parse_fcidump(&std::fs::read_to_string(fixtures_dir().join(&p.file)).unwrap()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-qubit matrix of a Pauli letter.
fn letter(ch: char) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match ch {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

/// Dense matrix by Kronecker products; qubit 0 is the least significant bit.
pub fn dense_string(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..p.n_qubits).rev() {
        m = m.kronecker(&letter(p.factor(q)));
    }
    m * p.coefficient
}

pub fn dense_sum(h: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for p in h.iter() {
        m += dense_string(&p);
    }
    m
}

/// Annihilation operator on spin orbital `p` from the occupation-number
/// rule `a_p|…1_p…⟩ = (−1)^{#occupied below p} |…0_p…⟩`.
pub fn dense_annihilator(p: usize, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        if b >> p & 1 == 1 {
            let sign = if (b & ((1 << p) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ (1 << p), b)] = c(sign, 0.0);
        }
    }
    m
}

pub fn dense_fermion(op: &ucc_ordering::FermionOperator, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut total = DMatrix::zeros(dim, dim);
    for (ops, coeff) in op.terms() {
        let mut m = DMatrix::identity(dim, dim);
        for o in ops {
            let a = dense_annihilator(o.index, n);
            m *= if o.dagger { a.adjoint() } else { a };
        }
        total += m * c(coeff, 0.0);
    }
    total
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.norm()))
}
