mod common;

use common::{dense_annihilator, dense_fermion, dense_string, dense_sum, max_diff};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use ucc_ordering::fermion::{
    double_generator, generalized_single_generator, hermitian_conjugate, normal_order, paired_double_generator,
    single_generator,
};
use ucc_ordering::pauli::{pauli_product, strings_commute};
use ucc_ordering::state::{apply_exp_generator, apply_exp_sum};
use ucc_ordering::{jordan_wigner, FermionOperator, Generator, LadderOp, PauliString, Statevector};

const N: usize = 4;

fn ladder_strategy(n: usize) -> impl Strategy<Value = Vec<LadderOp>> {
    prop::collection::vec((0..n, any::<bool>()), 1..=4)
        .prop_map(|v| v.into_iter().map(|(i, d)| LadderOp { index: i, dagger: d }).collect())
}

fn operator_strategy(n: usize) -> impl Strategy<Value = FermionOperator> {
    prop::collection::vec((ladder_strategy(n), -1.0..1.0f64), 1..5).prop_map(|terms| {
        let mut op = FermionOperator::zero();
        for (ops, c) in terms {
            op.add_term(ops, c);
        }
        op
    })
}

fn string_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    let mask = (1u64 << n) - 1;
    (0..=mask, 0..=mask, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(move |(x, z, re, im)| PauliString::new(n, x, z, Complex64::new(re, im)).unwrap())
}

#[test]
fn ladder_images_match_occupation_rule() {
    for p in 0..N {
        let a = FermionOperator::term(vec![LadderOp::annihilate(p)], 1.0);
        let ad = FermionOperator::term(vec![LadderOp::create(p)], 1.0);
        let oracle = dense_annihilator(p, N);
        assert!(max_diff(&dense_sum(&jordan_wigner(&a, N).unwrap()), &oracle) < 1e-14);
        assert!(max_diff(&dense_sum(&jordan_wigner(&ad, N).unwrap()), &oracle.adjoint()) < 1e-14);
    }
}

#[test]
fn canonical_anticommutation() {
    let dim = 1 << N;
    let id: DMatrix<Complex64> = DMatrix::identity(dim, dim);
    for p in 0..N {
        for q in 0..N {
            let ap = dense_sum(&jordan_wigner(&FermionOperator::term(vec![LadderOp::annihilate(p)], 1.0), N).unwrap());
            let aq = dense_sum(&jordan_wigner(&FermionOperator::term(vec![LadderOp::annihilate(q)], 1.0), N).unwrap());
            let anti = &ap * aq.adjoint() + aq.adjoint() * &ap;
            let expect = if p == q { id.clone() } else { DMatrix::zeros(dim, dim) };
            assert!(max_diff(&anti, &expect) < 1e-14, "{{a_{p}, a_{q}^}}");
            assert!(max_diff(&(&ap * &aq + &aq * &ap), &DMatrix::zeros(dim, dim)) < 1e-14);
        }
    }
}

#[test]
fn jordan_wigner_rejects_out_of_range_index() {
    let op = FermionOperator::term(vec![LadderOp::create(5)], 1.0);
    assert!(jordan_wigner(&op, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jordan_wigner_matches_dense_fock_space(op in operator_strategy(N)) {
        let jw = dense_sum(&jordan_wigner(&op, N).unwrap());
        prop_assert!(max_diff(&jw, &dense_fermion(&op, N)) < 1e-12);
    }

    #[test]
    fn normal_ordering_preserves_the_operator(op in operator_strategy(N)) {
        let no = normal_order(&op);
        prop_assert!(max_diff(&dense_fermion(&no, N), &dense_fermion(&op, N)) < 1e-12);
        for (ops, _) in no.terms() {
            let first_annihilator = ops.iter().position(|o| !o.dagger).unwrap_or(ops.len());
            prop_assert!(ops[first_annihilator..].iter().all(|o| !o.dagger));
        }
    }

    #[test]
    fn hermitian_conjugate_is_the_adjoint(op in operator_strategy(N)) {
        let hc = dense_fermion(&hermitian_conjugate(&op), N);
        prop_assert!(max_diff(&hc, &dense_fermion(&op, N).adjoint()) < 1e-12);
    }

    #[test]
    fn pauli_product_matches_matrix_product(a in string_strategy(3), b in string_strategy(3)) {
        let ab = pauli_product(&a, &b).unwrap();
        prop_assert!(max_diff(&dense_string(&ab), &(dense_string(&a) * dense_string(&b))) < 1e-12);
        let comm = dense_string(&a) * dense_string(&b) - dense_string(&b) * dense_string(&a);
        let vanishes = comm.iter().all(|v| v.norm() < 1e-12);
        let scale = a.coefficient.norm() * b.coefficient.norm();
        if scale > 1e-6 {
            prop_assert_eq!(strings_commute(&a, &b).unwrap(), vanishes);
        }
    }

    #[test]
    fn pauli_text_round_trip(a in string_strategy(5)) {
        let back: PauliString = a.to_string().parse().unwrap();
        prop_assert_eq!(back.x_mask, a.x_mask);
        prop_assert_eq!(back.z_mask, a.z_mask);
        prop_assert!((back.coefficient - a.coefficient).norm() < 1e-14);
    }
}

fn all_generators() -> Vec<Generator> {
    vec![
        single_generator(0, 2, N).unwrap(),
        single_generator(1, 3, N).unwrap(),
        double_generator(0, 1, 2, 3, N).unwrap(),
        paired_double_generator(1, 0, N).unwrap(),
        generalized_single_generator(0, 1, N).unwrap(),
    ]
}

fn random_state(seed: u64) -> Statevector {
    let mut rng = ucc_ordering::SeededRng::new(seed);
    let amps: Vec<Complex64> = (0..1 << N)
        .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(N, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn dense_apply(m: &DMatrix<Complex64>, psi: &Statevector) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * psi.amplitudes()[c]).sum())
        .collect()
}

fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn generators_are_anti_hermitian_and_match_their_fermionic_form() {
    for g in all_generators() {
        let m = dense_sum(&g.pauli);
        assert!(max_diff(&m, &(-m.adjoint())) < 1e-14, "{}", g.label());
        assert!(max_diff(&m, &dense_fermion(&g.fermionic, N)) < 1e-14, "{}", g.label());
    }
}

#[test]
fn exponentials_match_dense_matrix_exponential() {
    let psi = random_state(1);
    for (k, g) in all_generators().into_iter().enumerate() {
        let theta = 0.37 + 0.21 * k as f64;
        let u = (dense_sum(&g.pauli) * Complex64::new(theta, 0.0)).exp();
        let oracle = dense_apply(&u, &psi);

        let rotations = apply_exp_generator(&g, theta, &psi).unwrap();
        assert!(vec_diff(rotations.amplitudes(), &oracle) < 1e-12, "rotations {}", g.label());

        let mut fast = psi.clone();
        g.kernel.apply_exp(theta, &mut fast);
        assert!(vec_diff(fast.amplitudes(), &oracle) < 1e-12, "kernel {}", g.label());
    }
}

#[test]
fn kernel_action_matches_generator_matrix() {
    let psi = random_state(2);
    let lam = random_state(3);
    for g in all_generators() {
        let m = dense_sum(&g.pauli);
        let gpsi = dense_apply(&m, &psi);
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << N];
        g.kernel.apply_add(1.0, psi.amplitudes(), &mut out);
        assert!(vec_diff(&out, &gpsi) < 1e-13);
        let me: Complex64 = lam.amplitudes().iter().zip(&gpsi).map(|(l, v)| l.conj() * v).sum();
        assert!((g.kernel.matrix_element(&lam, &psi) - me).norm() < 1e-13);
    }
}

#[test]
fn exponential_of_sum_matches_dense() {
    let gens = all_generators();
    let thetas = [0.3, -0.7, 1.1, 0.4, -0.25];
    let mut a = DMatrix::<Complex64>::zeros(1 << N, 1 << N);
    for (g, t) in gens.iter().zip(thetas) {
        a += dense_sum(&g.pauli) * Complex64::new(t, 0.0);
    }
    let psi = random_state(4);
    let oracle = dense_apply(&a.exp(), &psi);
    let terms: Vec<(&Generator, f64)> = gens.iter().zip(thetas).collect();
    let out = apply_exp_sum(&terms, &psi, 1e-13).unwrap();
    assert!(vec_diff(out.amplitudes(), &oracle) < 1e-11);
    assert!((out.norm() - 1.0).abs() < 1e-12);
    assert!(apply_exp_sum(&terms, &psi, 0.0).is_err());
}

#[test]
fn exponential_of_sum_of_one_generator_is_its_exponential() {
    let g = double_generator(0, 1, 2, 3, N).unwrap();
    let psi = random_state(5);
    let a = apply_exp_sum(&[(&g, 2.5)], &psi, 1e-13).unwrap();
    let b = apply_exp_generator(&g, 2.5, &psi).unwrap();
    assert!(a.distance(&b) < 1e-12);
}

#[test]
fn size_mismatch_is_reported() {
    let g = single_generator(0, 2, N).unwrap();
    let psi = Statevector::zero_state(6);
    assert!(apply_exp_generator(&g, 0.1, &psi).is_err());
}
