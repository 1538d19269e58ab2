//! Fermionic ladder-operator algebra and UCC excitation generators.
//!
//! Spin orbitals are interleaved: spatial orbital `p` with spin α is spin
//! orbital `2p`, with spin β it is `2p + 1`. The qubit index used by the
//! Jordan-Wigner mapping equals the spin-orbital index.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, PauliSum};
use crate::state::ExcitationKernel;

/// Coefficients below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

/// A single creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LadderOp {
    pub index: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(index: usize) -> Self {
        Self { index, dagger: true }
    }

    pub fn annihilate(index: usize) -> Self {
        Self { index, dagger: false }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "{}^", self.index)
        } else {
            write!(f, "{}", self.index)
        }
    }
}

/// Linear combination of ladder-operator products with real coefficients.
///
/// The empty product is the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<LadderOp>, f64>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::term(Vec::new(), c)
    }

    pub fn term(ops: Vec<LadderOp>, coeff: f64) -> Self {
        let mut op = Self::zero();
        op.add_term(ops, coeff);
        op
    }

    /// Accumulates `coeff * ops`, dropping the term if it cancels.
    pub fn add_term(&mut self, ops: Vec<LadderOp>, coeff: f64) {
        match self.terms.entry(ops) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().abs() < PRUNE_TOL {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if coeff.abs() >= PRUNE_TOL {
                    e.insert(coeff);
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[LadderOp], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the identity term.
    pub fn constant_term(&self) -> f64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    pub fn coefficient(&self, ops: &[LadderOp]) -> f64 {
        self.terms.get(ops).copied().unwrap_or(0.0)
    }

    /// Largest spin-orbital index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|k| k.iter().map(|op| op.index))
            .max()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (ops, c) in self.terms() {
            out.add_term(ops.to_vec(), c * s);
        }
        out
    }

    /// True when every coefficient is below `tol` in magnitude.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.abs() < tol)
    }

    /// Maximum coefficient difference against `other` over the union of keys.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut diff = 0.0f64;
        for (k, &c) in &self.terms {
            diff = diff.max((c - other.terms.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, &c) in &other.terms {
            if !self.terms.contains_key(k) {
                diff = diff.max(c.abs());
            }
        }
        diff
    }
}

impl Add for &FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: &FermionOperator) -> FermionOperator {
        let mut out = self.clone();
        for (ops, c) in rhs.terms() {
            out.add_term(ops.to_vec(), c);
        }
        out
    }
}

impl Sub for &FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: &FermionOperator) -> FermionOperator {
        self + &(-rhs)
    }
}

impl Neg for &FermionOperator {
    type Output = FermionOperator;
    fn neg(self) -> FermionOperator {
        self.scale(-1.0)
    }
}

impl Mul for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: &FermionOperator) -> FermionOperator {
        let mut out = FermionOperator::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                let mut ops = a.to_vec();
                ops.extend_from_slice(b);
                out.add_term(ops, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (ops, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c} [")?;
            for (j, op) in ops.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{op}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Rewrites `op` with creations left of annihilations, each group in
/// descending index order, applying the canonical anticommutation relations.
pub fn normal_order(op: &FermionOperator) -> FermionOperator {
    let mut out = FermionOperator::zero();
    for (ops, c) in op.terms() {
        for (ordered, coeff) in normal_order_term(ops.to_vec(), c) {
            out.add_term(ordered, coeff);
        }
    }
    out
}

fn normal_order_term(mut ops: Vec<LadderOp>, mut coeff: f64) -> Vec<(Vec<LadderOp>, f64)> {
    let mut out = Vec::new();
    for i in 1..ops.len() {
        for j in (1..=i).rev() {
            let right = ops[j];
            let left = ops[j - 1];
            if right.dagger && !left.dagger {
                ops.swap(j - 1, j);
                coeff = -coeff;
                if right.index == left.index {
                    let mut contracted = ops[..j - 1].to_vec();
                    contracted.extend_from_slice(&ops[j + 1..]);
                    out.extend(normal_order_term(contracted, -coeff));
                }
            } else if right.dagger == left.dagger {
                if right.index == left.index {
                    // a a or a^ a^ on the same mode
                    return out;
                } else if right.index > left.index {
                    ops.swap(j - 1, j);
                    coeff = -coeff;
                }
            }
        }
    }
    out.push((ops, coeff));
    out
}

/// Reverses every product and flips its creation/annihilation flags.
pub fn hermitian_conjugate(op: &FermionOperator) -> FermionOperator {
    let mut out = FermionOperator::zero();
    for (ops, c) in op.terms() {
        let conj: Vec<LadderOp> = ops
            .iter()
            .rev()
            .map(|o| LadderOp {
                index: o.index,
                dagger: !o.dagger,
            })
            .collect();
        out.add_term(conj, c);
    }
    out
}

/// Excitation class of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rank {
    Single,
    Double,
    PairedDouble,
    GeneralizedSingle,
}

impl Rank {
    /// Singles and generalized singles group together for rank-based orderings.
    pub fn is_single_like(self) -> bool {
        matches!(self, Rank::Single | Rank::GeneralizedSingle)
    }
}

/// One anti-Hermitian UCC excitation operator together with its qubit image.
#[derive(Debug, Clone)]
pub struct Generator {
    pub id: usize,
    pub rank: Rank,
    /// 1-based block index (always 1 outside k-UpCCGSD).
    pub block: usize,
    /// `(i, a)`, `(i, j, a, b)` in spin orbitals, or `(p, q)` in spatial orbitals.
    pub orbital_labels: Vec<usize>,
    pub fermionic: FermionOperator,
    pub pauli: PauliSum,
    pub kernel: ExcitationKernel,
}

impl Generator {
    fn build(rank: Rank, labels: Vec<usize>, op: FermionOperator, n_qubits: usize) -> Result<Self> {
        let fermionic = normal_order(&op);
        let pauli = jordan_wigner(&fermionic, n_qubits)?;
        let kernel = ExcitationKernel::compile(&fermionic, n_qubits)?;
        Ok(Self {
            id: 0,
            rank,
            block: 1,
            orbital_labels: labels,
            fermionic,
            pauli,
            kernel,
        })
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.pauli.n_qubits()
    }

    /// Compact label, unique within a block, e.g. `D[0,1>4,5]`.
    pub fn label(&self) -> String {
        let l = &self.orbital_labels;
        match self.rank {
            Rank::Single => format!("S[{}>{}]", l[0], l[1]),
            Rank::Double => format!("D[{},{}>{},{}]", l[0], l[1], l[2], l[3]),
            Rank::PairedDouble => format!("PD[{}<{}]", l[0], l[1]),
            Rank::GeneralizedSingle => format!("GS[{},{}]", l[0], l[1]),
        }
    }
}

fn spin(so: usize) -> usize {
    so % 2
}

/// `a†_a a_i − a†_i a_a` for spin orbitals `i` and `a` of the same spin.
pub fn single_generator(i: usize, a: usize, n_qubits: usize) -> Result<Generator> {
    if i == a {
        return Err(Error::InvalidGenerator(format!("single excitation {i}->{a} is a number operator")));
    }
    if spin(i) != spin(a) {
        return Err(Error::InvalidGenerator(format!(
            "single excitation {i}->{a} changes Sz"
        )));
    }
    let c = LadderOp::create;
    let d = LadderOp::annihilate;
    let mut op = FermionOperator::term(vec![c(a), d(i)], 1.0);
    op.add_term(vec![c(i), d(a)], -1.0);
    Generator::build(Rank::Single, vec![i, a], op, n_qubits)
}

/// `a†_a a†_b a_j a_i − a†_i a†_j a_b a_a` with `i < j`, `a < b`.
pub fn double_generator(i: usize, j: usize, a: usize, b: usize, n_qubits: usize) -> Result<Generator> {
    if i >= j || a >= b {
        return Err(Error::InvalidGenerator(format!(
            "double excitation ({i},{j})->({a},{b}) requires i<j and a<b"
        )));
    }
    if [i, j].iter().any(|x| *x == a || *x == b) {
        return Err(Error::InvalidGenerator(format!(
            "double excitation ({i},{j})->({a},{b}) has colliding indices"
        )));
    }
    if spin(i) + spin(j) != spin(a) + spin(b) {
        return Err(Error::InvalidGenerator(format!(
            "double excitation ({i},{j})->({a},{b}) changes Sz"
        )));
    }
    let c = LadderOp::create;
    let d = LadderOp::annihilate;
    let mut op = FermionOperator::term(vec![c(a), c(b), d(j), d(i)], 1.0);
    op.add_term(vec![c(i), c(j), d(b), d(a)], -1.0);
    Generator::build(Rank::Double, vec![i, j, a, b], op, n_qubits)
}

/// Pair excitation `a†_{pα} a†_{pβ} a_{qβ} a_{qα} − h.c.` between spatial orbitals.
pub fn paired_double_generator(p: usize, q: usize, n_qubits: usize) -> Result<Generator> {
    if p == q {
        return Err(Error::InvalidGenerator(format!("paired double {p}<-{q} needs distinct orbitals")));
    }
    let c = LadderOp::create;
    let d = LadderOp::annihilate;
    let tau = FermionOperator::term(vec![c(2 * p), c(2 * p + 1), d(2 * q + 1), d(2 * q)], 1.0);
    let op = &tau - &hermitian_conjugate(&tau);
    Generator::build(Rank::PairedDouble, vec![p, q], op, n_qubits)
}

/// Spin-summed orbital rotation `Σ_σ (a†_{pσ} a_{qσ} − a†_{qσ} a_{pσ})`, `p < q`.
pub fn generalized_single_generator(p: usize, q: usize, n_qubits: usize) -> Result<Generator> {
    if p >= q {
        return Err(Error::InvalidGenerator(format!(
            "generalized single ({p},{q}) requires p < q"
        )));
    }
    let c = LadderOp::create;
    let d = LadderOp::annihilate;
    let mut op = FermionOperator::zero();
    for s in 0..2 {
        op.add_term(vec![c(2 * p + s), d(2 * q + s)], 1.0);
        op.add_term(vec![c(2 * q + s), d(2 * p + s)], -1.0);
    }
    Generator::build(Rank::GeneralizedSingle, vec![p, q], op, n_qubits)
}
