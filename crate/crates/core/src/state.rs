//! Dense statevector simulation.
//!
//! Bit `k` of a basis index is the occupation of spin orbital (qubit) `k`,
//! so `Z_k |…1_k…⟩ = −|…1_k…⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{normal_order, FermionOperator, Generator, LadderOp};
use crate::integrals::OccupationBitstring;
use crate::pauli::{i_pow, PauliString, PauliSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default truncation tolerance for [`apply_exp_sum`].
pub const EXP_SUM_TOL: f64 = 1e-12;
const TAYLOR_MAX_TERMS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1usize << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Contract(format!(
                "{} amplitudes cannot describe {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state whose bits equal the occupation flags.
    pub fn from_occupation(occ: &OccupationBitstring) -> Self {
        Self::basis(occ.n_qubits(), occ.index() as usize)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// L2 distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_size(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::SizeMismatch {
                expected: n_qubits,
                found: self.n_qubits,
            });
        }
        Ok(())
    }

    fn axpy(&mut self, a: Complex64, x: &[Complex64]) {
        for (y, xv) in self.amps.iter_mut().zip(x) {
            *y += a * xv;
        }
    }
}

/// Phase of `P|b⟩ = phase · |b ⊕ x⟩` for a unit string `(x, z)`.
#[inline]
fn string_phase(x: u64, z: u64, b: u64) -> Complex64 {
    let y = (x & z).count_ones() as i64;
    let s = if (b & z).count_ones() % 2 == 1 { 2 } else { 0 };
    i_pow(y + s)
}

/// Applies a single Pauli string (with its coefficient), accumulating into `out`.
fn accumulate_string(p: &PauliString, psi: &[Complex64], out: &mut [Complex64]) {
    for (b, amp) in psi.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let b = b as u64;
        out[(b ^ p.x_mask) as usize] += p.coefficient * string_phase(p.x_mask, p.z_mask, b) * amp;
    }
}

/// `h|ψ⟩` (unnormalized), computed term by term.
pub fn apply_hamiltonian(h: &PauliSum, psi: &Statevector) -> Result<Statevector> {
    psi.check_size(h.n_qubits())?;
    let mut out = vec![ZERO; psi.dim()];
    for p in h.iter() {
        accumulate_string(&p, &psi.amps, &mut out);
    }
    Ok(Statevector {
        n_qubits: psi.n_qubits,
        amps: out,
    })
}

/// `⟨ψ|h|ψ⟩` for Hermitian `h`.
pub fn expectation(h: &PauliSum, psi: &Statevector) -> Result<f64> {
    if !h.is_hermitian(1e-12) {
        return Err(Error::Contract("expectation requires a Hermitian operator".into()));
    }
    let hpsi = apply_hamiltonian(h, psi)?;
    real_part_checked(psi.inner(&hpsi))
}

pub(crate) fn real_part_checked(v: Complex64) -> Result<f64> {
    if v.im.abs() > 1e-10 {
        return Err(Error::Contract(format!(
            "expectation has imaginary residue {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// `e^{θG}|ψ⟩` as an ordered product of commuting single-string rotations.
///
/// With `G = Σ_j (i c_j) P_j`, each factor is `cos(θc_j) + i sin(θc_j) P_j`.
pub fn apply_exp_generator(g: &Generator, theta: f64, psi: &Statevector) -> Result<Statevector> {
    psi.check_size(g.n_qubits())?;
    if !g.pauli.is_anti_hermitian(1e-14) {
        return Err(Error::Contract(format!(
            "generator {} has non-imaginary Pauli coefficients",
            g.label()
        )));
    }
    if !g.pauli.terms_commute() {
        return Err(Error::Contract(format!(
            "generator {} has non-commuting Pauli terms",
            g.label()
        )));
    }
    let mut out = psi.clone();
    for p in g.pauli.iter() {
        let phi = theta * p.coefficient.im;
        rotate_string(p.x_mask, p.z_mask, phi, &mut out.amps);
    }
    Ok(out)
}

/// In-place `e^{iφP}` for the unit string `(x, z)`.
fn rotate_string(x: u64, z: u64, phi: f64, amps: &mut [Complex64]) {
    let (s, c) = phi.sin_cos();
    let is = Complex64::new(0.0, s);
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= c + is * string_phase(0, z, b as u64);
        }
        return;
    }
    let hi = 63 - x.leading_zeros() as u64;
    for b in 0..amps.len() as u64 {
        if b & (1 << hi) != 0 {
            continue;
        }
        let e = b ^ x;
        let (ab, ae) = (amps[b as usize], amps[e as usize]);
        amps[e as usize] = c * ae + is * string_phase(x, z, b) * ab;
        amps[b as usize] = c * ab + is * string_phase(x, z, e) * ae;
    }
}

/// Sparse row-compressed operator on the full `2^n` space.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    n_qubits: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    /// Compiles a Pauli sum into explicit matrix rows.
    pub fn from_pauli_sum(h: &PauliSum) -> Self {
        let n = h.n_qubits();
        let dim = 1usize << n;
        let mut groups: Vec<(u64, Vec<(u64, Complex64)>)> = Vec::new();
        for p in h.iter() {
            let c = p.coefficient * i_pow((p.x_mask & p.z_mask).count_ones() as i64);
            match groups.iter_mut().find(|(x, _)| *x == p.x_mask) {
                Some((_, zs)) => zs.push((p.z_mask, c)),
                None => groups.push((p.x_mask, vec![(p.z_mask, c)])),
            }
        }
        groups.sort_by_key(|(x, _)| *x);
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for row in 0..dim as u64 {
            for (x, zs) in &groups {
                // ⟨row| X^x Z^z |col⟩ with col = row ⊕ x
                let col = row ^ x;
                let mut v = ZERO;
                for (z, c) in zs {
                    if (col & z).count_ones() % 2 == 1 {
                        v -= c;
                    } else {
                        v += c;
                    }
                }
                if v.norm() > 1e-14 {
                    cols.push(col as u32);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            n_qubits: n,
            row_start,
            cols,
            vals,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero `(column, value)` entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn apply(&self, psi: &Statevector) -> Result<Statevector> {
        psi.check_size(self.n_qubits)?;
        let mut out = vec![ZERO; psi.dim()];
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_start[r]..self.row_start[r + 1];
            let mut acc = ZERO;
            for (c, v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * psi.amps[*c as usize];
            }
            *o = acc;
        }
        Ok(Statevector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `⟨ψ|A|ψ⟩` real part, checking the imaginary residue.
    pub fn expectation(&self, psi: &Statevector) -> Result<f64> {
        let a = self.apply(psi)?;
        real_part_checked(psi.inner(&a))
    }
}

/// One elementary excitation `c(τ − τ†)` as explicit basis-state pairs.
///
/// Every pair `(from, to, sign)` satisfies `τ|from⟩ = sign·|to⟩`.
#[derive(Debug, Clone, Default)]
struct GivensBlock {
    coeff: f64,
    pairs: Vec<(u32, u32, f64)>,
}

/// Compiled action of an anti-Hermitian excitation generator.
///
/// The generator is split into elementary excitations `c(τ − τ†)` acting on
/// disjoint spin orbitals. Each one squares to minus a projector, so its
/// exponential is an exact Givens rotation on basis-state pairs, and the
/// blocks commute. This is the same unitary as the Pauli-rotation product in
/// [`apply_exp_generator`], at a cost proportional to the number of pairs.
#[derive(Debug, Clone, Default)]
pub struct ExcitationKernel {
    n_qubits: usize,
    blocks: Vec<GivensBlock>,
}

/// `τ|b⟩` for a ladder product, applied right to left with Jordan-Wigner signs.
fn apply_ladder_product(ops: &[LadderOp], b: u64) -> Option<(u64, f64)> {
    let mut state = b;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.index;
        let occupied = state & bit != 0;
        if occupied == op.dagger {
            return None;
        }
        if (state & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        state ^= bit;
    }
    Some((state, sign))
}

fn mode_sets(ops: &[LadderOp]) -> (u64, u64) {
    let mut cre = 0u64;
    let mut ann = 0u64;
    for op in ops {
        if op.dagger {
            cre |= 1 << op.index;
        } else {
            ann |= 1 << op.index;
        }
    }
    (cre, ann)
}

impl ExcitationKernel {
    /// Compiles a normal-ordered anti-Hermitian excitation operator.
    pub fn compile(op: &FermionOperator, n_qubits: usize) -> Result<Self> {
        let op = normal_order(op);
        let terms: Vec<(Vec<LadderOp>, f64)> = op.terms().map(|(o, c)| (o.to_vec(), c)).collect();
        let mut used = vec![false; terms.len()];
        let mut blocks = Vec::new();
        let mut support = 0u64;
        for t in 0..terms.len() {
            if used[t] {
                continue;
            }
            let (ops, coeff) = &terms[t];
            let (cre, ann) = mode_sets(ops);
            if cre & ann != 0 || ops.is_empty() {
                return Err(Error::Contract(format!(
                    "term with coefficient {coeff} is not a pure excitation"
                )));
            }
            let partner = (0..terms.len()).find(|&u| !used[u] && u != t && mode_sets(&terms[u].0) == (ann, cre));
            let Some(u) = partner else {
                return Err(Error::Contract("excitation term without its conjugate partner".into()));
            };
            used[t] = true;
            used[u] = true;
            if support & (cre | ann) != 0 {
                return Err(Error::Contract(
                    "elementary excitations overlap; exponential would not factorize".into(),
                ));
            }
            support |= cre | ann;

            let mut block = GivensBlock {
                coeff: *coeff,
                pairs: Vec::new(),
            };
            for b in 0..(1u64 << n_qubits) {
                if let Some((to, sign)) = apply_ladder_product(ops, b) {
                    // anti-Hermiticity: partner maps `to` back with −coeff·sign
                    let back = apply_ladder_product(&terms[u].0, to)
                        .map(|(_, s)| s * terms[u].1)
                        .unwrap_or(0.0);
                    if (back + coeff * sign).abs() > 1e-12 {
                        return Err(Error::Contract("generator is not anti-Hermitian".into()));
                    }
                    block.pairs.push((b as u32, to as u32, sign));
                }
            }
            blocks.push(block);
        }
        Ok(Self { n_qubits, blocks })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// In-place `e^{θG}`.
    pub fn apply_exp(&self, theta: f64, psi: &mut Statevector) {
        let amps = &mut psi.amps;
        for blk in &self.blocks {
            let (s, c) = (blk.coeff * theta).sin_cos();
            for &(from, to, sign) in &blk.pairs {
                let (f, t) = (from as usize, to as usize);
                let (af, at) = (amps[f], amps[t]);
                amps[t] = c * at + (sign * s) * af;
                amps[f] = c * af - (sign * s) * at;
            }
        }
    }

    /// Accumulates `scale · G|ψ⟩` into `out`.
    pub fn apply_add(&self, scale: f64, psi: &[Complex64], out: &mut [Complex64]) {
        for blk in &self.blocks {
            let k = scale * blk.coeff;
            for &(from, to, sign) in &blk.pairs {
                let (f, t) = (from as usize, to as usize);
                out[t] += (k * sign) * psi[f];
                out[f] -= (k * sign) * psi[t];
            }
        }
    }

    /// `⟨λ|G|φ⟩`.
    pub fn matrix_element(&self, lambda: &Statevector, phi: &Statevector) -> Complex64 {
        let (l, p) = (&lambda.amps, &phi.amps);
        let mut acc = ZERO;
        for blk in &self.blocks {
            let mut part = ZERO;
            for &(from, to, sign) in &blk.pairs {
                let (f, t) = (from as usize, to as usize);
                part += sign * (l[t].conj() * p[f] - l[f].conj() * p[t]);
            }
            acc += blk.coeff * part;
        }
        acc
    }

    pub fn pair_count(&self) -> usize {
        self.blocks.iter().map(|b| b.pairs.len()).sum()
    }
}

/// `e^{Σ_k θ_k G_k}|ψ⟩` by substepped truncated Taylor series.
///
/// The substep count is `s = max(1, ⌈Σ_k |θ_k|·‖G_k‖₁⌉)` where `‖·‖₁` is the
/// sum of Pauli coefficient magnitudes; each substep sums terms until the
/// latest one drops below `tol / s` relative to `‖ψ‖`.
pub fn apply_exp_sum(gens: &[(&Generator, f64)], psi: &Statevector, tol: f64) -> Result<Statevector> {
    if tol <= 0.0 {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    for (g, _) in gens {
        psi.check_size(g.n_qubits())?;
    }
    let weight: f64 = gens.iter().map(|(g, t)| t.abs() * g.pauli.one_norm()).sum();
    let steps = weight.ceil().max(1.0) as usize;
    let norm_in = psi.norm();
    if norm_in == 0.0 {
        return Ok(psi.clone());
    }
    let step_tol = tol * norm_in / steps as f64;

    let mut cur = psi.clone();
    let mut term = vec![ZERO; psi.dim()];
    let mut next = vec![ZERO; psi.dim()];
    for step in 0..steps {
        term.copy_from_slice(&cur.amps);
        let mut converged = false;
        let mut last = f64::NAN;
        for m in 1..=TAYLOR_MAX_TERMS {
            next.iter_mut().for_each(|v| *v = ZERO);
            let scale = 1.0 / (steps as f64 * m as f64);
            for (g, theta) in gens {
                if *theta != 0.0 {
                    g.kernel.apply_add(theta * scale, &term, &mut next);
                }
            }
            std::mem::swap(&mut term, &mut next);
            cur.axpy(Complex64::new(1.0, 0.0), &term);
            last = term.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if last < step_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Taylor series did not converge in substep {step}/{steps} after {TAYLOR_MAX_TERMS} terms (last term norm {last:e}, weight {weight})"
            )));
        }
    }
    let drift = (cur.norm() - norm_in).abs() / norm_in;
    if drift >= tol.max(1e-13 * steps as f64) {
        return Err(Error::Numerical(format!(
            "relative norm drift {drift:e} exceeds tolerance {tol:e} over {steps} substeps"
        )));
    }
    Ok(cur)
}
