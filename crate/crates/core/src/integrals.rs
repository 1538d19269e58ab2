//! FCIDUMP ingestion and the second-quantized molecular Hamiltonian.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fermion::{normal_order, FermionOperator, LadderOp};

/// Spatial-orbital integrals of a restricted (spin-free) FCIDUMP.
///
/// `g2` holds chemist-notation `(pq|rs)` densely with all eight permutations
/// filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i64,
    pub core_energy: f64,
    h1: Vec<f64>,
    g2: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i64) -> Self {
        Self {
            n_spatial,
            n_electrons,
            ms2,
            core_energy: 0.0,
            h1: vec![0.0; n_spatial * n_spatial],
            g2: vec![0.0; n_spatial.pow(4)],
        }
    }

    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_spatial + q]
    }

    pub fn g2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g2[self.g2_index(p, q, r, s)]
    }

    fn g2_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    /// Sets `h[p][q]` and `h[q][p]`.
    pub fn set_h1(&mut self, p: usize, q: usize, v: f64) {
        let n = self.n_spatial;
        self.h1[p * n + q] = v;
        self.h1[q * n + p] = v;
    }

    /// Sets `(pq|rs)` and its seven symmetry partners.
    pub fn set_g2(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.g2_index(a, b, c, d);
            self.g2[i] = v;
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_spatial
    }

    /// Alpha and beta electron counts implied by `n_electrons` and `ms2`.
    pub fn n_alpha_beta(&self) -> (usize, usize) {
        let n = self.n_electrons as i64;
        (((n + self.ms2) / 2) as usize, ((n - self.ms2) / 2) as usize)
    }

    /// Largest elementwise difference against `other` (shapes must agree).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let scalar = (self.core_energy - other.core_energy).abs();
        let h = self
            .h1
            .iter()
            .zip(&other.h1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let g = self
            .g2
            .iter()
            .zip(&other.g2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        scalar.max(h).max(g)
    }
}

/// Occupation of each spin orbital; flag `k` is qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationBitstring {
    bits: Vec<bool>,
}

impl OccupationBitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn n_qubits(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Basis-state index with bit `k` set for each occupied orbital `k`.
    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (k, _)| acc | (1 << k))
    }

    pub fn alpha_count(&self) -> usize {
        self.bits.iter().step_by(2).filter(|b| **b).count()
    }

    pub fn beta_count(&self) -> usize {
        self.bits.iter().skip(1).step_by(2).filter(|b| **b).count()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: i64,
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let body = text.replace(',', " ");
    let mut fields: Vec<(String, Vec<String>)> = Vec::new();
    for tok in body.split_whitespace() {
        let upper = tok.to_ascii_uppercase();
        if matches!(upper.as_str(), "&FCI" | "$FCI" | "&END" | "$END" | "/") {
            continue;
        }
        if let Some((key, val)) = upper.split_once('=') {
            let mut vals = Vec::new();
            if !val.is_empty() {
                vals.push(val.to_string());
            }
            fields.push((key.to_string(), vals));
        } else if let Some((_, vals)) = fields.last_mut() {
            vals.push(upper);
        } else {
            return Err(parse_err(line, format!("unexpected token '{tok}' in header")));
        }
    }
    let mut h = Header::default();
    for (key, vals) in fields {
        let first = || {
            vals.first()
                .ok_or_else(|| parse_err(line, format!("{key} has no value")))
        };
        match key.as_str() {
            "NORB" => {
                h.norb = Some(
                    first()?
                        .parse()
                        .map_err(|_| parse_err(line, "NORB is not an integer"))?,
                )
            }
            "NELEC" => {
                h.nelec = Some(
                    first()?
                        .parse()
                        .map_err(|_| parse_err(line, "NELEC is not an integer"))?,
                )
            }
            "MS2" => {
                h.ms2 = first()?
                    .parse()
                    .map_err(|_| parse_err(line, "MS2 is not an integer"))?
            }
            "UHF" | "IUHF" => {
                let v = first()?;
                if matches!(v.as_str(), "1" | ".TRUE." | "T" | "TRUE") {
                    return Err(parse_err(line, "unrestricted FCIDUMP files are not supported"));
                }
            }
            // ORBSYM, ISYM and anything else are accepted and ignored
            _ => {}
        }
    }
    Ok(h)
}

fn header_terminated(line: &str) -> bool {
    let up = line.to_ascii_uppercase();
    up.contains("&END") || up.contains("$END") || up.trim() == "/" || up.trim_end().ends_with('/')
}

/// Parses a Knowles-Handy FCIDUMP (chemist notation, 1-based indices).
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let mut lines = text.lines().enumerate();
    let mut header = String::new();
    let mut header_end = 0;
    let mut terminated = false;
    for (n, line) in lines.by_ref() {
        header.push_str(line);
        header.push(' ');
        header_end = n + 1;
        if header_terminated(line) {
            terminated = true;
            break;
        }
    }
    if !terminated {
        return Err(parse_err(header_end.max(1), "header is not terminated by &END or /"));
    }
    if !header.trim_start().to_ascii_uppercase().starts_with("&FCI")
        && !header.trim_start().to_ascii_uppercase().starts_with("$FCI")
    {
        return Err(parse_err(1, "missing &FCI namelist"));
    }
    let h = parse_header(&header, header_end)?;
    let norb = h
        .norb
        .ok_or_else(|| parse_err(header_end, "header is missing NORB"))?;
    let nelec = h
        .nelec
        .ok_or_else(|| parse_err(header_end, "header is missing NELEC"))?;
    let mut ints = MolecularIntegrals::zeros(norb, nelec, h.ms2);

    for (n, line) in lines {
        let lineno = n + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(parse_err(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| parse_err(lineno, format!("non-numeric value '{}'", fields[0])))?;
        let mut idx = [0usize; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            idx[k] = f
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index '{f}'")))?;
            if idx[k] > norb {
                return Err(parse_err(
                    lineno,
                    format!("index {} outside [1, {norb}]", idx[k]),
                ));
            }
        }
        match idx {
            [0, 0, 0, 0] => ints.core_energy = value,
            // orbital energies
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_h1(i - 1, j - 1, value),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_g2(i - 1, j - 1, k - 1, l - 1, value)
            }
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("index pattern {idx:?} is not a valid record"),
                ))
            }
        }
    }
    Ok(ints)
}

/// Canonical FCIDUMP text: unique symmetry representatives in sorted order,
/// 17 significant digits, zeros omitted.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_spatial;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "&FCI NORB={},NELEC={},MS2={},",
        n, ints.n_electrons, ints.ms2
    );
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, "&END");
    for p in 0..n {
        for q in 0..=p {
            let pq = p * (p + 1) / 2 + q;
            for r in 0..n {
                for s in 0..=r {
                    let rs = r * (r + 1) / 2 + s;
                    if rs > pq {
                        continue;
                    }
                    let v = ints.g2(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.16e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h1(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{v:.16e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.16e} 0 0 0 0", ints.core_energy);
    out
}

/// `E_core + Σ h_pq a†_{pσ} a_{qσ} + ½ Σ (pr|qs) a†_{pσ} a†_{qτ} a_{sτ} a_{rσ}`
/// over interleaved spin orbitals, normal ordered.
pub fn build_fermionic_hamiltonian(ints: &MolecularIntegrals) -> FermionOperator {
    let n = ints.n_spatial;
    let c = LadderOp::create;
    let d = LadderOp::annihilate;
    let mut h = FermionOperator::constant(ints.core_energy);
    for p in 0..n {
        for q in 0..n {
            let v = ints.h1(p, q);
            if v == 0.0 {
                continue;
            }
            for s in 0..2 {
                h.add_term(vec![c(2 * p + s), d(2 * q + s)], v);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.g2(p, r, q, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sig in 0..2 {
                        for tau in 0..2 {
                            let (ps, qt) = (2 * p + sig, 2 * q + tau);
                            if ps == qt {
                                continue;
                            }
                            h.add_term(
                                vec![c(ps), c(qt), d(2 * s + tau), d(2 * r + sig)],
                                0.5 * v,
                            );
                        }
                    }
                }
            }
        }
    }
    normal_order(&h)
}

/// Restricted closed-shell reference: the lowest `n_electrons / 2` spatial
/// orbitals doubly occupied.
pub fn reference_determinant(ints: &MolecularIntegrals) -> Result<OccupationBitstring> {
    if ints.n_electrons % 2 == 1 {
        return Err(Error::UnsupportedReference(format!(
            "{} electrons cannot form a closed-shell singlet",
            ints.n_electrons
        )));
    }
    if ints.ms2 != 0 {
        return Err(Error::UnsupportedReference(format!("MS2={} is not a singlet", ints.ms2)));
    }
    let n_occ = ints.n_electrons / 2;
    if n_occ > ints.n_spatial {
        return Err(Error::UnsupportedReference(format!(
            "{} electrons do not fit {} orbitals",
            ints.n_electrons, ints.n_spatial
        )));
    }
    let bits = (0..ints.n_qubits()).map(|k| k / 2 < n_occ).collect();
    Ok(OccupationBitstring::new(bits))
}
