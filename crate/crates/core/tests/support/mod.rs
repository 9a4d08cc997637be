//! Randomized invariant checks shared by the property suite and the
//! acceptance run. Each check takes its random inputs as arguments.

#![allow(dead_code)]

use httn::htensor::{
    exact_open_link, expect_qt, implicit_isometrize, local_diagonalize, open_link_contraction, plan_contraction,
    settings_for, ContractionOrder, Fold, Meter, NoiseModel, QuantumTensor,
};
use httn::pauli::{OperatorSum, Pauli, PauliTerm};
use httn::qsim::{Circuit, PARAMS_PER_GATE};
use httn::tensor::{eigh_matrix, Matrix, C64};
use httn::ttn::{chain_order, TreeNetwork};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

fn entry(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(d, d, |_, _| entry(rng))
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let a = random_matrix(d, rng);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn random_params(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

/// A brick-wall quantum tensor with the given leg widths and, optionally,
/// random non-unitary `P_l`.
fn random_qt(legs: &[usize], rng: &mut ChaCha8Rng, with_p: bool) -> QuantumTensor {
    let n: usize = legs.iter().sum();
    let circuit = Circuit::brick_wall(n, 2).unwrap();
    let params = random_params(circuit.n_params(), rng);
    let mut qt = QuantumTensor::new(circuit, params, legs.to_vec()).unwrap();
    if with_p {
        for (l, &k) in legs.iter().enumerate() {
            qt.set_p(l, random_matrix(1 << k, rng)).unwrap();
        }
    }
    qt
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Tomography on a `k`-qubit open leg equals the dense partial contraction.
pub fn tomography_exact(seed: u64, k: usize, open: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut legs = vec![1, 2, 1];
    legs[open] = k;
    let qt = random_qt(&legs, &mut rng, true);
    let obs: Vec<Option<Matrix>> = legs
        .iter()
        .enumerate()
        .map(|(l, &q)| (l != open && rng.random_bool(0.7)).then(|| random_hermitian(1 << q, &mut rng)))
        .collect();
    let exact = exact_open_link(&qt, &obs, open).unwrap();
    for fold in [Fold::Result, Fold::Observable] {
        let m = open_link_contraction(&qt, &obs, open, fold, None).unwrap();
        let err = max_abs(&(&m.matrix - &exact));
        prop_assert!(err < 1e-10 * max_abs(&exact).max(1.0), "{fold:?}: {err}");
    }
    Ok(())
}

/// The open-link gram of a tensor with random `P_l` is positive semidefinite.
pub fn gram_psd(seed: u64, open: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qt = random_qt(&[2, 1, 2], &mut rng, true);
    let m = open_link_contraction(&qt, &[None, None, None], open, Fold::Result, None).unwrap();
    let e = eigh_matrix(&m.matrix).unwrap();
    prop_assert!(e.values[0] >= -1e-10, "min eigenvalue {}", e.values[0]);
    Ok(())
}

/// After implicit isometrization `Q† Q = I` and `T = Q R`.
pub fn implicit_isometry(seed: u64, leg: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qt = random_qt(&[2, 1, 2], &mut rng, true);
    let before = qt.dense().unwrap();
    let r = implicit_isometrize(&mut qt, leg, Fold::Result, None).unwrap();
    let others: Vec<usize> = (0..3).filter(|&l| l != leg).collect();
    let (q, _, _) = qt.dense().unwrap().matricize(&others).unwrap();
    let gram = q.adjoint() * &q;
    let d = gram.nrows();
    let defect = max_abs(&(gram - Matrix::identity(d, d)));
    prop_assert!(defect < 1e-10, "isometry defect {defect}");
    let (t, _, _) = before.matricize(&others).unwrap();
    prop_assert!(max_abs(&(q * r - &t)) < 1e-10 * max_abs(&t).max(1.0));
    Ok(())
}

/// Reverse-mode circuit gradient agrees with central differences.
pub fn gradient_fd(seed: u64, n: usize, layers: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circuit = Circuit::brick_wall(n, layers).unwrap();
    let params = random_params(circuit.n_params(), &mut rng);
    let mut op = OperatorSum::new(n);
    for _ in 0..4 {
        let letters: Vec<(usize, Pauli)> = (0..n).map(|s| (s, Pauli::ALL[rng.random_range(0..4)])).collect();
        op.push(PauliTerm::real(rng.random_range(-1.0..1.0), letters)).unwrap();
    }
    let (_, grad) = circuit.gradient(&params, &op).unwrap();
    let energy = |p: &[f64]| op.expectation(&circuit.simulate(p).unwrap()).unwrap();
    let h = 1e-5;
    let checked = rng.random_range(0..PARAMS_PER_GATE);
    for g in 0..circuit.n_gates() {
        let i = g * PARAMS_PER_GATE + checked;
        let mut plus = params.clone();
        plus[i] += h;
        let mut minus = params.clone();
        minus[i] -= h;
        let fd = (energy(&plus) - energy(&minus)) / (2.0 * h);
        prop_assert!((fd - grad[i]).abs() <= 1e-6, "param {i}: fd {fd} vs {}", grad[i]);
    }
    Ok(())
}

/// One-setting local-diagonalization measurement equals the direct expectation.
pub fn plan_vs_direct(seed: u64, with_p: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let legs = [1, 2, 2];
    let qt = random_qt(&legs, &mut rng, with_p);
    let obs: Vec<Option<Matrix>> = legs
        .iter()
        .map(|&q| rng.random_bool(0.8).then(|| random_hermitian(1 << q, &mut rng)))
        .collect();
    let measured = expect_qt(&qt, &obs, None).unwrap();
    let direct = qt.exact_expectation(&obs).unwrap();
    let scale = direct.norm().max(1.0);
    prop_assert!((measured - direct.re).abs() < 1e-10 * scale, "{measured} vs {direct}");
    prop_assert!(direct.im.abs() < 1e-10 * scale);
    prop_assert_eq!(local_diagonalize(&obs).unwrap().settings, 1);
    Ok(())
}

/// Moving the orthogonality center leaves the dense wave function unchanged.
pub fn gauge_invariance(seed: u64, moves: &[usize]) -> Check {
    let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 4, seed).unwrap();
    let psi = net.dense_state().unwrap();
    for &t in moves {
        net.move_center(t).unwrap();
        let phi = net.dense_state().unwrap();
        let diff = psi.iter().zip(&phi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "center {t}: {diff}");
    }
    Ok(())
}

/// Settings of the two contraction orders and of one tomography call.
pub fn contraction_counts(seed: u64, q: u32, m: u64) -> Check {
    prop_assert_eq!(plan_contraction(q, m), (m, m * 3u64.pow(q)));
    prop_assert_eq!(settings_for(ContractionOrder::ClassicalFirst, q, m), m);
    prop_assert_eq!(settings_for(ContractionOrder::QuantumFirst, q, m), m * 3u64.pow(q));
    let k = (q as usize).clamp(1, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qt = random_qt(&[k, 1], &mut rng, false);
    let mut meter = Meter::new(NoiseModel::noiseless());
    open_link_contraction(&qt, &[None, None], 0, Fold::Result, Some(&mut meter)).unwrap();
    prop_assert_eq!(meter.tomography_settings, 3u64.pow(k as u32));
    Ok(())
}

pub fn moves() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..6, 1..6)
}
