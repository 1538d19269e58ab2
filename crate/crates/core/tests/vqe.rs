mod common;

use std::sync::Arc;

use common::{dense_string, load};
use num_complex::Complex64;
use ucc_ordering::ansatz::Slot;
use ucc_ordering::integrals::build_fermionic_hamiltonian;
use ucc_ordering::pauli::sums_commute;
use ucc_ordering::state::{apply_exp_generator, apply_exp_sum, EXP_SUM_TOL};
use ucc_ordering::vqe::{FD_STEP, UNTROTTERIZED_TOL};
use ucc_ordering::{
    fci_ground_energy, jordan_wigner, order_program, sector_basis, set_trotter_number, sgo_ordering, uccsd_pool,
    AnsatzProgram, Form, Generator, MolecularIntegrals, OrderingStrategy, Pool, Rank, SeededRng, SgoOptions,
    Statevector, VqeOptions, VqeProblem,
};

fn setup(mol: &str, r: f64) -> (MolecularIntegrals, VqeProblem, Arc<Pool>) {
    let ints = load(mol, r);
    let problem = VqeProblem::from_integrals(&ints).unwrap();
    let (a, b) = ints.n_alpha_beta();
    let pool = Arc::new(uccsd_pool(ints.n_spatial, a, b).unwrap());
    (ints, problem, pool)
}

fn fci(ints: &MolecularIntegrals) -> f64 {
    let h = jordan_wigner(&build_fermionic_hamiltonian(ints), ints.n_qubits()).unwrap();
    let (a, b) = ints.n_alpha_beta();
    fci_ground_energy(&h, &sector_basis(ints.n_qubits(), a, b).unwrap())
        .unwrap()
        .energy
}

fn random_theta(n: usize, seed: u64, half_width: f64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..n).map(|_| rng.uniform(-half_width, half_width)).collect()
}

fn inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// ψ(θ) rebuilt from per-string Pauli rotations.
fn rotation_state(problem: &VqeProblem, program: &AnsatzProgram, theta: &[f64]) -> Statevector {
    let mut psi = problem.reference().clone();
    for (g, p, s) in program.factors() {
        psi = apply_exp_generator(g, theta[p] * s, &psi).unwrap();
    }
    psi
}

#[test]
fn fast_path_equals_pauli_rotation_product() {
    let (_, problem, pool) = setup("h4", 1.5);
    for seed in 0..3 {
        let prog = order_program(pool.clone(), OrderingStrategy::RandomShuffle { seed }).unwrap();
        let prog = set_trotter_number(&prog, 2).unwrap();
        let theta = random_theta(prog.parameter_count(), seed, 0.8);
        let fast = problem.prepare_state(&prog, &theta).unwrap();
        assert!(fast.distance(&rotation_state(&problem, &prog, &theta)) < 1e-12);
    }
}

#[test]
fn gradient_at_zero_is_commutator_expectation() {
    let (_, problem, pool) = setup("h4", 1.5);
    let prog = order_program(pool.clone(), OrderingStrategy::AsGenerated).unwrap();
    let grad = problem.gradient(&prog, &vec![0.0; prog.parameter_count()]).unwrap();
    let h = problem.hamiltonian();
    let r = problem.reference().amplitudes();
    for g in pool.generators() {
        let comm = h.commutator(&g.pauli).unwrap();
        let mut value = Complex64::new(0.0, 0.0);
        for p in comm.iter() {
            let m = dense_string(&p);
            for (i, ri) in r.iter().enumerate() {
                for (j, rj) in r.iter().enumerate() {
                    value += ri.conj() * m[(i, j)] * rj;
                }
            }
        }
        assert!(value.im.abs() < 1e-12);
        assert!((grad[g.id] - value.re).abs() < 1e-10, "{}", g.label());
    }
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for (mol, r) in [("h2", 0.7414), ("h4", 1.5)] {
        let (_, problem, pool) = setup(mol, r);
        for seed in 0..10u64 {
            let prog = order_program(pool.clone(), OrderingStrategy::RandomShuffle { seed }).unwrap();
            let prog = set_trotter_number(&prog, 1 + (seed % 3) as usize).unwrap();
            let theta = random_theta(prog.parameter_count(), 100 + seed, 1.0);
            let g = problem.gradient(&prog, &theta).unwrap();
            let fd = problem.gradient_fd(&prog, &theta, FD_STEP).unwrap();
            assert!(inf_diff(&g, &fd) < 1e-6, "{mol} seed {seed}: {}", inf_diff(&g, &fd));
        }
    }
}

#[test]
fn finite_difference_gradient_of_untrotterized_form() {
    let (_, problem, pool) = setup("h4", 1.5);
    let prog = AnsatzProgram::untrotterized(pool).unwrap();
    let theta = random_theta(prog.parameter_count(), 5, 0.3);
    let g1 = problem.gradient_fd(&prog, &theta, 1e-5).unwrap();
    let g2 = problem.gradient_fd(&prog, &theta, 2e-5).unwrap();
    assert!(inf_diff(&g1, &g2) < 1e-7);
}

#[test]
fn quadrature_gradient_matches_finite_differences() {
    let (_, problem, pool) = setup("h4", 1.5);
    let multi = Arc::new(ucc_ordering::kupccgsd_pool(4, 2).unwrap());
    for (pool, width) in [(pool, 0.4), (multi, 1.0)] {
        let prog = AnsatzProgram::untrotterized(pool).unwrap();
        let theta = random_theta(prog.parameter_count(), 77, width);
        let (e, g) = problem.energy_and_gradient_untrotterized(&prog, &theta).unwrap();
        assert!((e - problem.energy(&prog, &theta).unwrap()).abs() < 1e-12);
        let fd = problem.gradient_fd(&prog, &theta, FD_STEP).unwrap();
        assert!(inf_diff(&g, &fd) < 1e-8, "{}", inf_diff(&g, &fd));
    }
}

#[test]
fn gradient_vanishes_at_optimum() {
    let (_, problem, pool) = setup("h2", 0.7414);
    let double = pool.generators().iter().find(|g| g.rank == Rank::Double).unwrap().id;
    let slots = vec![Slot {
        generator: double,
        parameter: 0,
        block: 1,
    }];
    let prog = AnsatzProgram::new(pool, slots, Form::Trotterized, OrderingStrategy::AsGenerated).unwrap();
    let res = problem.minimize_bfgs(&prog, &[0.0], &VqeOptions::default()).unwrap();
    let g = problem.gradient(&prog, &res.parameters).unwrap();
    assert!(g[0].abs() < 1e-8);
}

#[test]
fn h2_double_amplitude_reaches_two_level_optimum() {
    let (ints, problem, pool) = setup("h2", 0.7414);
    let double = pool.generators().iter().find(|g| g.rank == Rank::Double).unwrap().id;
    let prog = AnsatzProgram::new(
        pool,
        vec![Slot {
            generator: double,
            parameter: 0,
            block: 1,
        }],
        Form::Trotterized,
        OrderingStrategy::AsGenerated,
    )
    .unwrap();
    // 2x2 CI between |1100> and |0011>
    let h = problem.operator();
    let (r, d) = (0b0011usize, 0b1100usize);
    let entry = |i: usize, j: usize| h.row(i).find(|(c, _)| *c == j).map_or(0.0, |(_, v)| v.re);
    let (a, b, k) = (entry(r, r), entry(d, d), entry(r, d));
    let e2 = 0.5 * (a + b) - (0.25 * (a - b).powi(2) + k * k).sqrt();
    let res = problem.minimize_bfgs(&prog, &[0.0], &VqeOptions::default()).unwrap();
    assert!((res.energy - e2).abs() < 1e-10);
    assert!((res.energy - fci(&ints)).abs() < 1e-8);
}

#[test]
fn h2_every_ordering_is_exact() {
    let (ints, problem, pool) = setup("h2", 0.7414);
    let e_fci = fci(&ints);
    let ids: Vec<usize> = (0..3).collect();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in perms {
        let slots = perm
            .iter()
            .map(|&i| Slot {
                generator: ids[i],
                parameter: ids[i],
                block: 1,
            })
            .collect();
        let prog = AnsatzProgram::new(pool.clone(), slots, Form::Trotterized, OrderingStrategy::AsGenerated).unwrap();
        let res = problem.minimize_bfgs(&prog, &[0.0; 3], &VqeOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.energy - e_fci).abs() < 1e-8, "{perm:?}: {}", res.energy - e_fci);
    }
    let un = AnsatzProgram::untrotterized(pool).unwrap();
    let res = problem.minimize_bfgs(&un, &[0.0; 3], &VqeOptions::default()).unwrap();
    assert!((res.energy - e_fci).abs() < 1e-8);
}

#[test]
fn commuting_generators_are_order_independent() {
    let (_, problem, pool) = setup("h4", 2.0);
    let singles: Vec<&Generator> = ["S[0>4]", "S[1>5]", "S[3>7]"]
        .iter()
        .map(|l| pool.find(1, l).unwrap())
        .collect();
    for a in &singles {
        for b in &singles {
            assert!(sums_commute(&a.pauli, &b.pauli).unwrap());
        }
    }
    let mut energies = Vec::new();
    let mut rng = SeededRng::new(21);
    for _ in 0..20 {
        let mut order: Vec<usize> = (0..3).collect();
        rng.shuffle(&mut order);
        let slots = order
            .iter()
            .map(|&k| Slot {
                generator: singles[k].id,
                parameter: k,
                block: 1,
            })
            .collect();
        let prog = AnsatzProgram::new(pool.clone(), slots, Form::Trotterized, OrderingStrategy::AsGenerated).unwrap();
        energies.push(problem.minimize_bfgs(&prog, &[0.0; 3], &VqeOptions::default()).unwrap().energy);
    }
    let (lo, hi) = energies.iter().fold((f64::MAX, f64::MIN), |(l, h), &e| (l.min(e), h.max(e)));
    assert!(hi - lo < 1e-9);
}

#[test]
fn trotter_error_is_first_order() {
    let (_, problem, pool) = setup("h4", 1.5);
    let prog = order_program(pool.clone(), OrderingStrategy::AsGenerated).unwrap();
    let theta = random_theta(prog.parameter_count(), 2024, 0.2);
    let terms: Vec<(&Generator, f64)> = pool.generators().iter().map(|g| (g, theta[g.id])).collect();
    let exact = apply_exp_sum(&terms, problem.reference(), UNTROTTERIZED_TOL).unwrap();
    let d = |n: usize| {
        let p = set_trotter_number(&prog, n).unwrap();
        problem.prepare_state(&p, &theta).unwrap().distance(&exact)
    };
    let ratio = d(16) / d(8);
    assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    assert!(d(1) > d(8));
}

#[test]
fn untrotterized_energy_uses_exponential_of_sum() {
    let (_, problem, pool) = setup("h4", 1.5);
    let prog = AnsatzProgram::untrotterized(pool.clone()).unwrap();
    let theta = random_theta(prog.parameter_count(), 8, 0.3);
    let terms: Vec<(&Generator, f64)> = pool.generators().iter().map(|g| (g, theta[g.id])).collect();
    let psi = apply_exp_sum(&terms, problem.reference(), EXP_SUM_TOL).unwrap();
    let e = problem.operator().expectation(&psi).unwrap();
    assert!((problem.energy(&prog, &theta).unwrap() - e).abs() < 1e-11);
}

#[test]
fn optimized_energies_respect_variational_bound() {
    let (ints, problem, pool) = setup("h4", 2.0);
    let e_fci = fci(&ints);
    for seed in 0..3 {
        let prog = order_program(pool.clone(), OrderingStrategy::RandomShuffle { seed }).unwrap();
        let res = problem
            .minimize_bfgs(&prog, &vec![0.0; prog.parameter_count()], &VqeOptions::default())
            .unwrap();
        assert!(res.energy >= e_fci - 1e-9);
        assert!(!res.converged || res.final_gradient_norm < 1e-8);
    }
}

#[test]
fn stationary_start_stays_put() {
    let (_, problem, pool) = setup("h2", 0.7414);
    let prog = order_program(pool, OrderingStrategy::AsGenerated).unwrap();
    let opts = VqeOptions::default();
    let first = problem.minimize_bfgs(&prog, &[0.0; 3], &opts).unwrap();
    let again = problem.minimize_bfgs(&prog, &first.parameters, &opts).unwrap();
    assert!(again.iterations <= 2);
    assert!((again.energy - first.energy).abs() < 1e-12);
}

#[test]
fn sgo_first_choice_follows_brillouin_condition() {
    let (_, problem, pool) = setup("h2", 0.7414);
    let out = sgo_ordering(&problem, pool.clone(), &SgoOptions::default()).unwrap();
    assert_eq!(pool.generator(out.trace[0].generator).rank, Rank::Double);
    let (_, problem4, pool4) = setup("h4", 1.5);
    let prog = order_program(pool4.clone(), OrderingStrategy::AsGenerated).unwrap();
    let grad = problem4.gradient(&prog, &vec![0.0; prog.parameter_count()]).unwrap();
    let best = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let opts = SgoOptions {
        reoptimize: false,
        ..Default::default()
    };
    let out = sgo_ordering(&problem4, pool4, &opts).unwrap();
    assert!((out.trace[0].score - best).abs() < 1e-12);
    assert_eq!(out.program.parameter_count(), 26);
}
