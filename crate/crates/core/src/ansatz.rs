//! Generator pools and ordered ansatz programs.
//!
//! A program is an ordered list of slots. In the Trotterized form slot 0 is
//! applied to the reference first (it is the rightmost exponential), and the
//! whole sequence is repeated `trotter_n` times with every angle divided by
//! `trotter_n`. The un-Trotterized form applies one summed exponential per
//! block, in block order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fermion::{
    double_generator, generalized_single_generator, paired_double_generator, single_generator, Generator,
};
use crate::rng::SeededRng;

/// Identifies a pool; pools are pure functions of their descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoolDescriptor {
    Uccsd {
        n_spatial: usize,
        n_alpha: usize,
        n_beta: usize,
    },
    Kupccgsd {
        n_spatial: usize,
        k: usize,
    },
}

impl PoolDescriptor {
    pub fn n_qubits(&self) -> usize {
        match *self {
            PoolDescriptor::Uccsd { n_spatial, .. } | PoolDescriptor::Kupccgsd { n_spatial, .. } => 2 * n_spatial,
        }
    }

    pub fn blocks(&self) -> usize {
        match *self {
            PoolDescriptor::Uccsd { .. } => 1,
            PoolDescriptor::Kupccgsd { k, .. } => k,
        }
    }

    fn canonical(&self) -> String {
        match *self {
            PoolDescriptor::Uccsd {
                n_spatial,
                n_alpha,
                n_beta,
            } => format!("uccsd;n_spatial={n_spatial};n_alpha={n_alpha};n_beta={n_beta}"),
            PoolDescriptor::Kupccgsd { n_spatial, k } => format!("kupccgsd;n_spatial={n_spatial};k={k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pool {
    descriptor: PoolDescriptor,
    generators: Vec<Generator>,
}

impl Pool {
    pub fn build(descriptor: PoolDescriptor) -> Result<Self> {
        match descriptor {
            PoolDescriptor::Uccsd {
                n_spatial,
                n_alpha,
                n_beta,
            } => uccsd_pool(n_spatial, n_alpha, n_beta),
            PoolDescriptor::Kupccgsd { n_spatial, k } => kupccgsd_pool(n_spatial, k),
        }
    }

    pub fn descriptor(&self) -> PoolDescriptor {
        self.descriptor
    }

    /// Short hash of the descriptor.
    pub fn pool_ref(&self) -> String {
        let digest = Sha256::digest(self.descriptor.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, id: usize) -> &Generator {
        &self.generators[id]
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.descriptor.n_qubits()
    }

    pub fn blocks(&self) -> usize {
        self.descriptor.blocks()
    }

    /// Generators of the 1-based block `b`.
    pub fn block(&self, b: usize) -> impl Iterator<Item = &Generator> {
        self.generators.iter().filter(move |g| g.block == b)
    }

    pub fn find(&self, block: usize, label: &str) -> Option<&Generator> {
        self.generators
            .iter()
            .find(|g| g.block == block && g.label() == label)
    }
}

/// Sz-conserving occupied→virtual singles and doubles over spin orbitals.
///
/// Canonical order: singles by `(i, a)`, then doubles by `(i, j, a, b)`.
pub fn uccsd_pool(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Result<Pool> {
    if n_alpha != n_beta {
        return Err(Error::UnsupportedReference(format!(
            "UCCSD pool needs a closed-shell reference, got {n_alpha} alpha / {n_beta} beta"
        )));
    }
    if n_alpha > n_spatial {
        return Err(Error::UnsupportedReference(format!(
            "{n_alpha} electrons per spin do not fit {n_spatial} orbitals"
        )));
    }
    let nq = 2 * n_spatial;
    let occupied = |so: usize| {
        let p = so / 2;
        if so % 2 == 0 {
            p < n_alpha
        } else {
            p < n_beta
        }
    };
    let occ: Vec<usize> = (0..nq).filter(|&s| occupied(s)).collect();
    let virt: Vec<usize> = (0..nq).filter(|&s| !occupied(s)).collect();

    let mut gens = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if i % 2 == a % 2 {
                gens.push(single_generator(i, a, nq)?);
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if i % 2 + j % 2 == a % 2 + b % 2 {
                        gens.push(double_generator(i, j, a, b, nq)?);
                    }
                }
            }
        }
    }
    Ok(finish_pool(
        PoolDescriptor::Uccsd {
            n_spatial,
            n_alpha,
            n_beta,
        },
        gens,
    ))
}

/// `k` blocks of paired doubles then spin-summed generalized singles.
pub fn kupccgsd_pool(n_spatial: usize, k: usize) -> Result<Pool> {
    if k < 1 {
        return Err(Error::Program("k-UpCCGSD needs k >= 1".into()));
    }
    let nq = 2 * n_spatial;
    let mut gens = Vec::new();
    for block in 1..=k {
        for p in 0..n_spatial {
            for q in p + 1..n_spatial {
                gens.push(paired_double_generator(p, q, nq)?.with_block(block));
            }
        }
        for p in 0..n_spatial {
            for q in p + 1..n_spatial {
                gens.push(generalized_single_generator(p, q, nq)?.with_block(block));
            }
        }
    }
    Ok(finish_pool(PoolDescriptor::Kupccgsd { n_spatial, k }, gens))
}

fn finish_pool(descriptor: PoolDescriptor, gens: Vec<Generator>) -> Pool {
    let generators = gens
        .into_iter()
        .enumerate()
        .map(|(id, g)| g.with_id(id))
        .collect();
    Pool {
        descriptor,
        generators,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Trotterized,
    Untrotterized,
}

/// How slots are ordered within each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderingStrategy {
    AsGenerated,
    RandomShuffle { seed: u64 },
    SinglesFirst { seed: u64 },
    DoublesFirst { seed: u64 },
    Sgo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub generator: usize,
    pub parameter: usize,
    pub block: usize,
}

#[derive(Debug, Clone)]
pub struct AnsatzProgram {
    pool: Arc<Pool>,
    slots: Vec<Slot>,
    trotter_n: usize,
    form: Form,
    strategy: OrderingStrategy,
    n_params: usize,
}

impl AnsatzProgram {
    /// Validates and wraps a slot list (Trotter number 1).
    pub fn new(pool: Arc<Pool>, slots: Vec<Slot>, form: Form, strategy: OrderingStrategy) -> Result<Self> {
        let mut seen = vec![false; slots.len()];
        for s in &slots {
            if s.generator >= pool.len() {
                return Err(Error::Program(format!("slot references unknown generator {}", s.generator)));
            }
            if pool.generator(s.generator).block != s.block {
                return Err(Error::Program(format!(
                    "generator {} belongs to block {}, slot says {}",
                    s.generator,
                    pool.generator(s.generator).block,
                    s.block
                )));
            }
            match seen.get_mut(s.parameter) {
                Some(flag) if !*flag => *flag = true,
                _ => {
                    return Err(Error::Program(format!(
                        "parameter indices must be a permutation of 0..{}",
                        slots.len()
                    )))
                }
            }
        }
        if slots.windows(2).any(|w| w[1].block < w[0].block) {
            return Err(Error::Program("slots cross block boundaries out of order".into()));
        }
        let n_params = slots.len();
        Ok(Self {
            pool,
            slots,
            trotter_n: 1,
            form,
            strategy,
            n_params,
        })
    }

    /// Canonical-order program applied as one summed exponential per block.
    pub fn untrotterized(pool: Arc<Pool>) -> Result<Self> {
        let slots = canonical_slots(&pool);
        Self::new(pool, slots, Form::Untrotterized, OrderingStrategy::AsGenerated)
    }

    pub fn pool(&self) -> &Arc<Pool> {
        &self.pool
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn trotter_n(&self) -> usize {
        self.trotter_n
    }

    pub fn strategy(&self) -> OrderingStrategy {
        self.strategy
    }

    pub fn parameter_count(&self) -> usize {
        self.n_params
    }

    pub fn n_qubits(&self) -> usize {
        self.pool.n_qubits()
    }

    /// Applied factors in application order: `(generator, parameter, scale)`.
    pub fn factors(&self) -> impl Iterator<Item = (&Generator, usize, f64)> + '_ {
        let scale = 1.0 / self.trotter_n as f64;
        (0..self.trotter_n).flat_map(move |_| {
            self.slots
                .iter()
                .map(move |s| (self.pool.generator(s.generator), s.parameter, scale))
        })
    }

    pub fn factor_count(&self) -> usize {
        self.slots.len() * self.trotter_n
    }

    /// Reorders `theta` so entry `id` is the angle of generator `id`.
    /// Generators absent from the program get zero.
    pub fn angles_by_generator(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.pool.len()];
        for s in &self.slots {
            out[s.generator] = theta[s.parameter];
        }
        out
    }

    /// Inverse of [`Self::angles_by_generator`].
    pub fn angles_from_generator_order(&self, by_generator: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params];
        for s in &self.slots {
            out[s.parameter] = by_generator[s.generator];
        }
        out
    }

    /// `block:label` for each slot, in slot order.
    pub fn ordering_labels(&self) -> Vec<String> {
        self.slots
            .iter()
            .map(|s| format!("{}:{}", s.block, self.pool.generator(s.generator).label()))
            .collect()
    }

    pub fn to_document(&self) -> ProgramDocument {
        ProgramDocument {
            pool: self.pool.descriptor(),
            pool_ref: self.pool.pool_ref(),
            form: self.form,
            trotter_n: self.trotter_n,
            strategy: self.strategy,
            slots: self
                .slots
                .iter()
                .map(|s| SlotRecord {
                    label: self.pool.generator(s.generator).label(),
                    block: s.block,
                    parameter: s.parameter,
                })
                .collect(),
        }
    }

    /// Rebuilds a program from its document, regenerating the pool when
    /// `pool` is `None`.
    pub fn from_document(doc: &ProgramDocument, pool: Option<Arc<Pool>>) -> Result<Self> {
        let pool = match pool {
            Some(p) if p.descriptor() == doc.pool => p,
            Some(_) => return Err(Error::Program("document was written for a different pool".into())),
            None => Arc::new(Pool::build(doc.pool)?),
        };
        if pool.pool_ref() != doc.pool_ref {
            return Err(Error::Program(format!(
                "pool_ref mismatch: document {} vs rebuilt {}",
                doc.pool_ref,
                pool.pool_ref()
            )));
        }
        let slots = doc
            .slots
            .iter()
            .map(|r| {
                pool.find(r.block, &r.label)
                    .map(|g| Slot {
                        generator: g.id,
                        parameter: r.parameter,
                        block: r.block,
                    })
                    .ok_or_else(|| Error::Program(format!("unknown generator {}:{}", r.block, r.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        let prog = Self::new(pool, slots, doc.form, doc.strategy)?;
        if doc.form == Form::Trotterized {
            set_trotter_number(&prog, doc.trotter_n)
        } else {
            Ok(prog)
        }
    }
}

/// Serializable program description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramDocument {
    pub pool: PoolDescriptor,
    pub pool_ref: String,
    pub form: Form,
    pub trotter_n: usize,
    pub strategy: OrderingStrategy,
    pub slots: Vec<SlotRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub label: String,
    pub block: usize,
    pub parameter: usize,
}

fn canonical_slots(pool: &Pool) -> Vec<Slot> {
    pool.generators()
        .iter()
        .map(|g| Slot {
            generator: g.id,
            parameter: g.id,
            block: g.block,
        })
        .collect()
}

/// Orders a pool into a Trotterized program.
///
/// Every block receives the same within-block permutation, so a k-block
/// program with seed `s` repeats the 1-block ordering for seed `s`. The
/// parameter of each slot is its generator id.
pub fn order_program(pool: Arc<Pool>, strategy: OrderingStrategy) -> Result<AnsatzProgram> {
    if pool.is_empty() {
        return Err(Error::Program("cannot order an empty pool".into()));
    }
    let block_len = pool.len() / pool.blocks();
    let first: Vec<&Generator> = pool.block(1).collect();
    let mut perm: Vec<usize> = (0..block_len).collect();
    match strategy {
        OrderingStrategy::AsGenerated => {}
        OrderingStrategy::RandomShuffle { seed } => SeededRng::new(seed).shuffle(&mut perm),
        OrderingStrategy::SinglesFirst { seed } | OrderingStrategy::DoublesFirst { seed } => {
            let (mut singles, mut doubles): (Vec<usize>, Vec<usize>) =
                perm.iter().partition(|&&p| first[p].rank.is_single_like());
            let mut rng = SeededRng::new(seed);
            rng.shuffle(&mut singles);
            rng.shuffle(&mut doubles);
            perm = if matches!(strategy, OrderingStrategy::SinglesFirst { .. }) {
                singles.into_iter().chain(doubles).collect()
            } else {
                doubles.into_iter().chain(singles).collect()
            };
        }
        OrderingStrategy::Sgo => {
            return Err(Error::Program(
                "sequential gradient ordering needs energies; use the VQE driver".into(),
            ))
        }
    }
    let mut slots = Vec::with_capacity(pool.len());
    for b in 0..pool.blocks() {
        for &p in &perm {
            let id = b * block_len + p;
            slots.push(Slot {
                generator: id,
                parameter: id,
                block: b + 1,
            });
        }
    }
    AnsatzProgram::new(pool, slots, Form::Trotterized, strategy)
}

/// Repeats the slot sequence `n` times with angles divided by `n`.
pub fn set_trotter_number(program: &AnsatzProgram, n: usize) -> Result<AnsatzProgram> {
    if n < 1 {
        return Err(Error::Program("Trotter number must be at least 1".into()));
    }
    if program.form != Form::Trotterized {
        return Err(Error::Program("Trotter number applies to Trotterized programs only".into()));
    }
    let mut out = program.clone();
    out.trotter_n = n;
    Ok(out)
}
