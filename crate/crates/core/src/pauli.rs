//! Bit-mask Pauli strings, Pauli sums, and the Jordan-Wigner transform.
//!
//! A string is stored as `(x_mask, z_mask)`: qubit `k` carries X when only
//! the x bit is set, Z when only the z bit is set, and Y when both are set.
//! As an operator, `(x, z)` equals `i^{|x & z|} X^x Z^z`.
//!
//! The Jordan-Wigner convention places the Z string on qubits below the
//! target mode:
//!
//! ```text
//! a†_p = ½ (X_p − i Y_p) Z_{p−1} ⋯ Z_0
//! a_p  = ½ (X_p + i Y_p) Z_{p−1} ⋯ Z_0
//! ```

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, PRUNE_TOL};

/// Maximum register width supported by the 64-bit masks.
pub const MAX_QUBITS: usize = 64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `i^k` for any integer `k`.
pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn width_mask(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

/// Pauli string with a complex coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x_mask: u64,
    pub z_mask: u64,
    pub coefficient: Complex64,
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, coefficient: Complex64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Mapping(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let w = width_mask(n_qubits);
        if x_mask & !w != 0 || z_mask & !w != 0 {
            return Err(Error::Mapping(format!(
                "masks x={x_mask:#x} z={z_mask:#x} do not fit {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
            coefficient,
        })
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
            coefficient,
        }
    }

    /// Builds a string from `(qubit, 'X'|'Y'|'Z')` factors.
    pub fn from_factors(n_qubits: usize, factors: &[(usize, char)], coefficient: Complex64) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for &(q, p) in factors {
            if q >= n_qubits {
                return Err(Error::Mapping(format!("qubit {q} outside {n_qubits}-qubit register")));
            }
            let bit = 1u64 << q;
            if (x | z) & bit != 0 {
                return Err(Error::Mapping(format!("qubit {q} repeated")));
            }
            match p {
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                'I' => {}
                other => return Err(Error::Mapping(format!("unknown Pauli '{other}'"))),
            }
        }
        Self::new(n_qubits, x, z, coefficient)
    }

    /// Single-qubit factor on `qubit`.
    pub fn factor(&self, qubit: usize) -> char {
        let bit = 1u64 << qubit;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coefficient;
        write!(f, "({}{}{}i)", c.re, if c.im.is_sign_negative() { "" } else { "+" }, c.im)?;
        if self.x_mask | self.z_mask == 0 {
            return write!(f, " I");
        }
        for q in 0..self.n_qubits {
            let p = self.factor(q);
            if p != 'I' {
                write!(f, " {p}{q}")?;
            }
        }
        Ok(())
    }
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let body = s.strip_prefix('(')?.strip_suffix(')')?.strip_suffix('i')?;
    // split at the sign that starts the imaginary part (skip exponent signs)
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let k = split?;
    let re: f64 = body[..k].parse().ok()?;
    let im: f64 = body[k..].trim_start_matches('+').parse().ok()?;
    Some(Complex64::new(re, im))
}

/// Parses one rendered string. The register width is taken as one past the
/// highest qubit mentioned, unless widened later by [`PauliSum::from_text`].
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let close = s
            .find(')')
            .ok_or_else(|| Error::Mapping(format!("missing coefficient in '{s}'")))?;
        let coefficient = parse_complex(&s[..=close])
            .ok_or_else(|| Error::Mapping(format!("bad coefficient in '{s}'")))?;
        let mut factors = Vec::new();
        for tok in s[close + 1..].split_whitespace() {
            if tok == "I" {
                continue;
            }
            let (p, q) = tok.split_at(1);
            let q: usize = q
                .parse()
                .map_err(|_| Error::Mapping(format!("bad factor '{tok}'")))?;
            factors.push((q, p.chars().next().unwrap_or('?')));
        }
        let n = factors.iter().map(|(q, _)| q + 1).max().unwrap_or(0);
        Self::from_factors(n, &factors, coefficient)
    }
}

/// Product of two strings with the exact accumulated phase.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.check_size(b)?;
    let x = a.x_mask ^ b.x_mask;
    let z = a.z_mask ^ b.z_mask;
    let k = (a.x_mask & a.z_mask).count_ones() as i64 + (b.x_mask & b.z_mask).count_ones() as i64
        + 2 * (a.z_mask & b.x_mask).count_ones() as i64
        - (x & z).count_ones() as i64;
    Ok(PauliString {
        n_qubits: a.n_qubits,
        x_mask: x,
        z_mask: z,
        coefficient: a.coefficient * b.coefficient * i_pow(k),
    })
}

/// True when the strings commute (even number of anticommuting sites).
pub fn strings_commute(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.check_size(b)?;
    Ok(anticommuting_sites(a.x_mask, a.z_mask, b.x_mask, b.z_mask) % 2 == 0)
}

#[inline]
pub(crate) fn anticommuting_sites(ax: u64, az: u64, bx: u64, bz: u64) -> u32 {
    ((ax & bz) ^ (az & bx)).count_ones()
}

/// Sum of Pauli strings with unique masks.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, c: f64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_string(PauliString::identity(n_qubits, Complex64::new(c, 0.0)))
            .expect("identity fits any register");
        s
    }

    pub fn from_strings(n_qubits: usize, strings: impl IntoIterator<Item = PauliString>) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        for p in strings {
            s.add_string(p)?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_string(&mut self, p: PauliString) -> Result<()> {
        if p.n_qubits > self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: p.n_qubits,
            });
        }
        self.accumulate(p.x_mask, p.z_mask, p.coefficient);
        Ok(())
    }

    fn accumulate(&mut self, x: u64, z: u64, c: Complex64) {
        match self.terms.entry((x, z)) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().norm() < PRUNE_TOL {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c.norm() >= PRUNE_TOL {
                    e.insert(c);
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = PauliString> + '_ {
        self.terms.iter().map(move |(&(x, z), &c)| PauliString {
            n_qubits: self.n_qubits,
            x_mask: x,
            z_mask: z,
            coefficient: c,
        })
    }

    pub fn coefficient(&self, x_mask: u64, z_mask: u64) -> Complex64 {
        self.terms.get(&(x_mask, z_mask)).copied().unwrap_or_default()
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (&(x, z), &c) in &other.terms {
            out.accumulate(x, z, c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n_qubits);
        for (&(x, z), &c) in &self.terms {
            out.accumulate(x, z, c * s);
        }
        out
    }

    /// Collected operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = Self::zero(self.n_qubits);
        for a in self.iter() {
            for b in other.iter() {
                let p = pauli_product(&a, &b)?;
                out.accumulate(p.x_mask, p.z_mask, p.coefficient);
            }
        }
        Ok(out)
    }

    /// Collected commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = Self::zero(self.n_qubits);
        for a in self.iter() {
            for b in other.iter() {
                if anticommuting_sites(a.x_mask, a.z_mask, b.x_mask, b.z_mask) % 2 == 0 {
                    continue;
                }
                // anticommuting strings: ab − ba = 2ab
                let p = pauli_product(&a, &b)?;
                out.accumulate(p.x_mask, p.z_mask, p.coefficient * 2.0);
            }
        }
        Ok(out)
    }

    /// Sum of coefficient magnitudes.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    /// True when all strings in the sum mutually commute.
    pub fn terms_commute(&self) -> bool {
        let keys: Vec<_> = self.terms.keys().copied().collect();
        keys.iter().enumerate().all(|(i, &(ax, az))| {
            keys[i + 1..]
                .iter()
                .all(|&(bx, bz)| anticommuting_sites(ax, az, bx, bz) % 2 == 0)
        })
    }

    /// Maximum coefficient difference over the union of keys.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut diff = 0.0f64;
        for (k, &c) in &self.terms {
            diff = diff.max((c - other.terms.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, &c) in &other.terms {
            if !self.terms.contains_key(k) {
                diff = diff.max(c.norm());
            }
        }
        diff
    }

    /// Parses the one-string-per-line rendering produced by `Display`.
    pub fn from_text(n_qubits: usize, text: &str) -> Result<Self> {
        let mut out = Self::zero(n_qubits);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let p: PauliString = line.parse()?;
            let p = PauliString::new(n_qubits, p.x_mask, p.z_mask, p.coefficient)?;
            out.add_string(p)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

/// True iff `AB − BA` collects to zero.
pub fn sums_commute(a: &PauliSum, b: &PauliSum) -> Result<bool> {
    Ok(a.commutator(b)?.is_empty())
}

fn ladder_image(index: usize, dagger: bool, n_qubits: usize) -> PauliSum {
    let low = (1u64 << index) - 1;
    let bit = 1u64 << index;
    let y_sign = if dagger { -0.5 } else { 0.5 };
    let mut s = PauliSum::zero(n_qubits);
    s.accumulate(bit, low, Complex64::new(0.5, 0.0));
    s.accumulate(bit, low | bit, I * y_sign);
    s
}

/// Jordan-Wigner image of a fermionic operator on `n_qubits` qubits.
pub fn jordan_wigner(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Mapping(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
    }
    if let Some(m) = op.max_index() {
        if m >= n_qubits {
            return Err(Error::Mapping(format!(
                "mode {m} does not fit a {n_qubits}-qubit register"
            )));
        }
    }
    let mut out = PauliSum::zero(n_qubits);
    for (ops, c) in op.terms() {
        let mut acc = PauliSum::identity(n_qubits, c);
        for l in ops {
            acc = acc.mul(&ladder_image(l.index, l.dagger, n_qubits))?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::LadderOp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliString::from_factors(1, &[(0, 'X')], c(1.0, 0.0)).unwrap();
        let z = PauliString::from_factors(1, &[(0, 'Z')], c(1.0, 0.0)).unwrap();
        let p = pauli_product(&x, &z).unwrap();
        assert_eq!(p.factor(0), 'Y');
        assert_eq!(p.coefficient, c(0.0, -1.0));
    }

    #[test]
    fn square_is_identity_times_coefficient_squared() {
        let p = PauliString::from_factors(3, &[(0, 'Y'), (1, 'X'), (2, 'Z')], c(0.3, 0.4)).unwrap();
        let sq = pauli_product(&p, &p).unwrap();
        assert_eq!((sq.x_mask, sq.z_mask), (0, 0));
        assert!((sq.coefficient - c(0.3, 0.4) * c(0.3, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn commutation_rules() {
        let one = c(1.0, 0.0);
        let a = PauliString::from_factors(2, &[(0, 'X'), (1, 'Y')], one).unwrap();
        let b = PauliString::from_factors(2, &[(0, 'Y'), (1, 'X')], one).unwrap();
        assert!(strings_commute(&a, &b).unwrap());
        let x = PauliString::from_factors(1, &[(0, 'X')], one).unwrap();
        let z = PauliString::from_factors(1, &[(0, 'Z')], one).unwrap();
        assert!(!strings_commute(&x, &z).unwrap());
        assert!(strings_commute(&a, &a).unwrap());
        assert!(matches!(strings_commute(&a, &x), Err(Error::SizeMismatch { .. })));
        assert!(pauli_product(&a, &x).is_err());
    }

    #[test]
    fn number_operator_image() {
        let n = FermionOperator::term(vec![LadderOp::create(0), LadderOp::annihilate(0)], 1.0);
        let s = jordan_wigner(&n, 1).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coefficient(0, 0), c(0.5, 0.0));
        assert_eq!(s.coefficient(0, 1), c(-0.5, 0.0));
    }

    #[test]
    fn creation_image_on_three_qubits() {
        let op = FermionOperator::term(vec![LadderOp::create(2)], 1.0);
        let s = jordan_wigner(&op, 3).unwrap();
        assert_eq!(s.len(), 2);
        // ½ X2 Z1 Z0
        assert_eq!(s.coefficient(0b100, 0b011), c(0.5, 0.0));
        // −i/2 Y2 Z1 Z0
        assert_eq!(s.coefficient(0b100, 0b111), c(0.0, -0.5));
        assert!(jordan_wigner(&op, 2).is_err());
    }

    #[test]
    fn render_round_trip() {
        let p = PauliString::from_factors(4, &[(0, 'X'), (1, 'Z'), (3, 'Y')], c(0.5, -1.25e-3)).unwrap();
        let text = p.to_string();
        assert_eq!(text, "(0.5-0.00125i) X0 Z1 Y3");
        let q: PauliString = text.parse().unwrap();
        assert_eq!(q, p);

        let sum = PauliSum::from_strings(
            4,
            [p, PauliString::identity(4, c(-2.0, 0.0))],
        )
        .unwrap();
        let back = PauliSum::from_text(4, &sum.to_string()).unwrap();
        assert_eq!(back, sum);
    }

    #[test]
    fn sums_commute_on_self_and_disjoint() {
        let one = c(1.0, 0.0);
        let a = PauliSum::from_strings(
            4,
            [
                PauliString::from_factors(4, &[(0, 'X'), (1, 'Y')], one).unwrap(),
                PauliString::from_factors(4, &[(0, 'Z')], one).unwrap(),
            ],
        )
        .unwrap();
        let b = PauliSum::from_strings(4, [PauliString::from_factors(4, &[(2, 'X'), (3, 'Y')], one).unwrap()]).unwrap();
        assert!(sums_commute(&a, &a).unwrap());
        assert!(sums_commute(&a, &b).unwrap());
        assert!(!a.terms_commute());
    }

    #[test]
    fn masks_must_fit() {
        assert!(PauliString::new(2, 0b100, 0, c(1.0, 0.0)).is_err());
        assert!(PauliString::from_factors(2, &[(0, 'X'), (0, 'Z')], c(1.0, 0.0)).is_err());
    }
}
