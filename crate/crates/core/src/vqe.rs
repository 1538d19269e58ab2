//! Energies, gradients and optimization of ansatz programs.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzProgram, Form, OrderingStrategy, Pool, Slot};
use crate::bfgs::{self, BfgsOptions};
use crate::error::{Error, Result};
use crate::fermion::Generator;
use crate::integrals::{build_fermionic_hamiltonian, reference_determinant, MolecularIntegrals};
use crate::pauli::{jordan_wigner, PauliSum};
use crate::rng::SeededRng;
use crate::state::{apply_exp_sum, SparseOperator, Statevector};

/// Truncation tolerance for un-Trotterized exponentials. Tighter than the
/// state-engine default so finite differences of the energy stay smooth.
pub const UNTROTTERIZED_TOL: f64 = 1e-15;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub energy: f64,
    pub parameters: Vec<f64>,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    pub message: String,
}

/// Qubit Hamiltonian, its compiled matrix and the reference state.
#[derive(Debug, Clone)]
pub struct VqeProblem {
    hamiltonian: PauliSum,
    operator: SparseOperator,
    reference: Statevector,
}

impl VqeProblem {
    pub fn new(hamiltonian: PauliSum, reference: Statevector) -> Result<Self> {
        reference.check_size(hamiltonian.n_qubits())?;
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(Error::Contract("Hamiltonian is not Hermitian".into()));
        }
        let operator = SparseOperator::from_pauli_sum(&hamiltonian);
        Ok(Self {
            hamiltonian,
            operator,
            reference,
        })
    }

    /// Jordan-Wigner Hamiltonian and closed-shell reference of a molecule.
    pub fn from_integrals(ints: &MolecularIntegrals) -> Result<Self> {
        let h = jordan_wigner(&build_fermionic_hamiltonian(ints), ints.n_qubits())?;
        let occ = reference_determinant(ints)?;
        Self::new(h, Statevector::from_occupation(&occ))
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.operator
    }

    pub fn reference(&self) -> &Statevector {
        &self.reference
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    fn check(&self, program: &AnsatzProgram, theta: &[f64]) -> Result<()> {
        if program.n_qubits() != self.n_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits(),
                found: program.n_qubits(),
            });
        }
        if theta.len() != program.parameter_count() {
            return Err(Error::SizeMismatch {
                expected: program.parameter_count(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// `ψ(θ)`.
    pub fn prepare_state(&self, program: &AnsatzProgram, theta: &[f64]) -> Result<Statevector> {
        self.check(program, theta)?;
        let mut psi = self.reference.clone();
        match program.form() {
            Form::Trotterized => {
                for (g, p, scale) in program.factors() {
                    g.kernel.apply_exp(theta[p] * scale, &mut psi);
                }
            }
            Form::Untrotterized => {
                let pool = program.pool();
                for b in 1..=pool.blocks() {
                    let terms: Vec<(&Generator, f64)> = program
                        .slots()
                        .iter()
                        .filter(|s| s.block == b)
                        .map(|s| (pool.generator(s.generator), theta[s.parameter]))
                        .collect();
                    if !terms.is_empty() {
                        psi = apply_exp_sum(&terms, &psi, UNTROTTERIZED_TOL)?;
                    }
                }
            }
        }
        Ok(psi)
    }

    pub fn energy(&self, program: &AnsatzProgram, theta: &[f64]) -> Result<f64> {
        let psi = self.prepare_state(program, theta)?;
        self.operator.expectation(&psi)
    }

    /// Analytic gradient by a reverse sweep over the applied factors.
    pub fn gradient(&self, program: &AnsatzProgram, theta: &[f64]) -> Result<Vec<f64>> {
        self.energy_and_gradient(program, theta).map(|(_, g)| g)
    }

    /// Energy and analytic gradient of a Trotterized program.
    pub fn energy_and_gradient(&self, program: &AnsatzProgram, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        if program.form() != Form::Trotterized {
            return Err(Error::Contract(
                "analytic gradient needs a Trotterized program; use gradient_fd".into(),
            ));
        }
        let mut phi = self.prepare_state(program, theta)?;
        let mut lambda = self.operator.apply(&phi)?;
        let energy = crate::state::real_part_checked(phi.inner(&lambda))?;
        let mut grad = vec![0.0; theta.len()];
        let factors: Vec<_> = program.factors().collect();
        for &(g, p, scale) in factors.iter().rev() {
            grad[p] += 2.0 * scale * g.kernel.matrix_element(&lambda, &phi).re;
            let undo = -theta[p] * scale;
            g.kernel.apply_exp(undo, &mut phi);
            g.kernel.apply_exp(undo, &mut lambda);
        }
        Ok((energy, grad))
    }

    /// Central differences `(E(θ + h e_k) − E(θ − h e_k)) / 2h`.
    pub fn gradient_fd(&self, program: &AnsatzProgram, theta: &[f64], h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0) {
            return Err(Error::Contract(format!("finite-difference step must be positive, got {h}")));
        }
        self.check(program, theta)?;
        let mut work = theta.to_vec();
        let mut grad = Vec::with_capacity(theta.len());
        for k in 0..theta.len() {
            work[k] = theta[k] + h;
            let up = self.energy(program, &work)?;
            work[k] = theta[k] - h;
            let down = self.energy(program, &work)?;
            work[k] = theta[k];
            grad.push((up - down) / (2.0 * h));
        }
        Ok(grad)
    }

    /// Energy and gradient of an un-Trotterized program from the integral
    /// representation `∂e^{A}/∂θ_k = ∫₀¹ e^{sA} G_k e^{(1−s)A} ds`, evaluated
    /// by Gauss-Legendre quadrature per block in a reverse sweep.
    pub fn energy_and_gradient_untrotterized(
        &self,
        program: &AnsatzProgram,
        theta: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if program.form() != Form::Untrotterized {
            return Err(Error::Contract("quadrature gradient needs an un-Trotterized program".into()));
        }
        self.check(program, theta)?;
        let pool = program.pool();
        let blocks: Vec<Vec<(&Generator, usize)>> = (1..=pool.blocks())
            .map(|b| {
                program
                    .slots()
                    .iter()
                    .filter(|s| s.block == b)
                    .map(|s| (pool.generator(s.generator), s.parameter))
                    .collect()
            })
            .collect();
        fn scaled<'g>(block: &[(&'g Generator, usize)], theta: &[f64], t: f64) -> Vec<(&'g Generator, f64)> {
            block.iter().map(|&(g, p)| (g, theta[p] * t)).collect()
        }

        let mut inputs = Vec::with_capacity(blocks.len());
        let mut psi = self.reference.clone();
        for block in &blocks {
            inputs.push(psi.clone());
            if !block.is_empty() {
                psi = apply_exp_sum(&scaled(block, theta, 1.0), &psi, UNTROTTERIZED_TOL)?;
            }
        }
        let mut lambda = self.operator.apply(&psi)?;
        let energy = crate::state::real_part_checked(psi.inner(&lambda))?;
        let mut grad = vec![0.0; theta.len()];
        for (block, input) in blocks.iter().zip(&inputs).rev() {
            if block.is_empty() {
                continue;
            }
            let weight: f64 = block.iter().map(|&(g, p)| theta[p].abs() * g.pauli.one_norm()).sum();
            let order = ((2.0 * weight).ceil() as usize + 12).min(64);
            let (nodes, weights) = gauss_legendre(order);
            // right states at t = 1 − s, left states at s, both built incrementally
            let mut right = vec![input.clone(); order];
            let mut state = input.clone();
            let mut t_prev = 0.0;
            for q in (0..order).rev() {
                let t = 1.0 - nodes[q];
                state = apply_exp_sum(&scaled(block, theta, t - t_prev), &state, UNTROTTERIZED_TOL)?;
                right[q] = state.clone();
                t_prev = t;
            }
            let mut left = lambda.clone();
            let mut s_prev = 0.0;
            for q in 0..order {
                left = apply_exp_sum(&scaled(block, theta, s_prev - nodes[q]), &left, UNTROTTERIZED_TOL)?;
                s_prev = nodes[q];
                for &(g, p) in block {
                    grad[p] += 2.0 * weights[q] * g.kernel.matrix_element(&left, &right[q]).re;
                }
            }
            lambda = apply_exp_sum(&scaled(block, theta, -1.0), &lambda, UNTROTTERIZED_TOL)?;
        }
        Ok((energy, grad))
    }

    fn objective(&self, program: &AnsatzProgram, theta: &[f64], opts: &VqeOptions) -> Result<(f64, Vec<f64>)> {
        match (program.form(), opts.untrotterized_gradient) {
            (Form::Trotterized, _) => self.energy_and_gradient(program, theta),
            (Form::Untrotterized, UntrotterizedGradient::Quadrature) => {
                self.energy_and_gradient_untrotterized(program, theta)
            }
            (Form::Untrotterized, UntrotterizedGradient::FiniteDifference) => Ok((
                self.energy(program, theta)?,
                self.gradient_fd(program, theta, opts.fd_step)?,
            )),
        }
    }

    /// BFGS from `theta0`. Un-Trotterized programs take their gradient from
    /// `opts.untrotterized_gradient`.
    pub fn minimize_bfgs(&self, program: &AnsatzProgram, theta0: &[f64], opts: &VqeOptions) -> Result<VqeResult> {
        self.check(program, theta0)?;
        let start = Instant::now();
        let out = bfgs::minimize(|x| self.objective(program, x, opts), theta0, &opts.bfgs)?;
        Ok(VqeResult {
            energy: out.f,
            parameters: out.x,
            iterations: out.iterations,
            final_gradient_norm: out.gradient_norm,
            converged: out.converged,
            wall_time: start.elapsed().as_secs_f64(),
            message: out.message,
        })
    }

    /// `m` minimizations; restart `r` draws its start from substream `r` of
    /// `seed`. Restarts run on the rayon pool.
    pub fn optimize_with_restarts(
        &self,
        program: &AnsatzProgram,
        m: usize,
        init: InitSpec,
        seed: u64,
        opts: &VqeOptions,
    ) -> Result<RestartOutcome> {
        if m == 0 {
            return Err(Error::Contract("at least one restart is required".into()));
        }
        let n = program.parameter_count();
        let all = (0..m as u64)
            .into_par_iter()
            .map(|r| {
                let theta0 = init.draw(n, &mut SeededRng::substream(seed, r));
                self.minimize_bfgs(program, &theta0, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        let best = all
            .iter()
            .enumerate()
            .fold(0, |b, (i, r)| if r.energy < all[b].energy { i } else { b });
        Ok(RestartOutcome { best, results: all })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeOptions {
    pub bfgs: BfgsOptions,
    pub fd_step: f64,
    pub untrotterized_gradient: UntrotterizedGradient,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            fd_step: FD_STEP,
            untrotterized_gradient: UntrotterizedGradient::Quadrature,
        }
    }
}

/// Gradient source for un-Trotterized optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UntrotterizedGradient {
    Quadrature,
    FiniteDifference,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, ascending.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Distribution of starting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Zeros,
    Uniform { low: f64, high: f64 },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Uniform { low: -0.5, high: 0.5 }
    }
}

impl InitSpec {
    pub fn draw(&self, n: usize, rng: &mut SeededRng) -> Vec<f64> {
        match *self {
            InitSpec::Zeros => vec![0.0; n],
            InitSpec::Uniform { low, high } => (0..n).map(|_| rng.uniform(low, high)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    /// Index of the lowest-energy result (first one on ties).
    pub best: usize,
    pub results: Vec<VqeResult>,
}

impl RestartOutcome {
    pub fn best(&self) -> &VqeResult {
        &self.results[self.best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgoOptions {
    /// Re-optimize every parameter after each addition. When false only the
    /// new parameter is optimized, followed by one full optimization from
    /// zero once the ordering is complete.
    pub reoptimize: bool,
    pub vqe: VqeOptions,
}

impl Default for SgoOptions {
    fn default() -> Self {
        Self {
            reoptimize: true,
            vqe: VqeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgoStep {
    pub generator: usize,
    pub label: String,
    pub score: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SgoOutcome {
    pub program: AnsatzProgram,
    pub trace: Vec<SgoStep>,
    pub result: VqeResult,
}

/// Scores closer than this count as tied.
const SGO_TIE_TOL: f64 = 1e-12;

/// Greedy ordering: repeatedly appends the unused generator with the largest
/// `|⟨ψ|[H, G]|ψ⟩|` at the current optimized state.
///
/// Parameter `k` belongs to the `k`-th generator added. Ties go to the lowest
/// generator id.
pub fn sgo_ordering(problem: &VqeProblem, pool: Arc<Pool>, opts: &SgoOptions) -> Result<SgoOutcome> {
    if pool.is_empty() {
        return Err(Error::Program("sequential ordering of an empty pool".into()));
    }
    if pool.blocks() != 1 {
        return Err(Error::Program("sequential ordering supports single-block pools only".into()));
    }
    let start = Instant::now();
    let mut remaining: BTreeSet<usize> = (0..pool.len()).collect();
    let mut slots: Vec<Slot> = Vec::new();
    let mut theta: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut psi = problem.reference.clone();
    let mut last: Option<VqeResult> = None;

    while !remaining.is_empty() {
        let h_psi = problem.operator.apply(&psi)?;
        let mut best: Option<(usize, f64)> = None;
        for &id in &remaining {
            let score = (2.0 * pool.generator(id).kernel.matrix_element(&h_psi, &psi).re).abs();
            if best.map_or(true, |(_, s)| score > s + SGO_TIE_TOL) {
                best = Some((id, score));
            }
        }
        let (id, score) = best.expect("remaining is nonempty");
        remaining.remove(&id);
        slots.push(Slot {
            generator: id,
            parameter: slots.len(),
            block: 1,
        });
        theta.push(0.0);
        let program = AnsatzProgram::new(pool.clone(), slots.clone(), Form::Trotterized, OrderingStrategy::Sgo)?;
        let result = if opts.reoptimize {
            problem.minimize_bfgs(&program, &theta, &opts.vqe)?
        } else {
            optimize_last(problem, &program, &theta, &opts.vqe)?
        };
        theta.clone_from(&result.parameters);
        psi = problem.prepare_state(&program, &theta)?;
        trace.push(SgoStep {
            generator: id,
            label: pool.generator(id).label(),
            score,
            energy: result.energy,
        });
        last = Some(result);
    }

    let program = AnsatzProgram::new(pool, slots, Form::Trotterized, OrderingStrategy::Sgo)?;
    let mut result = if opts.reoptimize {
        last.expect("at least one step")
    } else {
        problem.minimize_bfgs(&program, &vec![0.0; program.parameter_count()], &opts.vqe)?
    };
    result.wall_time = start.elapsed().as_secs_f64();
    Ok(SgoOutcome { program, trace, result })
}

fn optimize_last(problem: &VqeProblem, program: &AnsatzProgram, theta: &[f64], opts: &VqeOptions) -> Result<VqeResult> {
    let k = theta.len() - 1;
    let start = Instant::now();
    let mut work = theta.to_vec();
    let out = bfgs::minimize(
        |x| {
            work[k] = x[0];
            let (e, g) = problem.energy_and_gradient(program, &work)?;
            Ok((e, vec![g[k]]))
        },
        &[theta[k]],
        &opts.bfgs,
    )?;
    let mut parameters = theta.to_vec();
    parameters[k] = out.x[0];
    Ok(VqeResult {
        energy: out.f,
        parameters,
        iterations: out.iterations,
        final_gradient_norm: out.gradient_norm,
        converged: out.converged,
        wall_time: start.elapsed().as_secs_f64(),
        message: out.message,
    })
}
