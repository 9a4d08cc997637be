//! Open-link contraction of a quantum tensor by Pauli tomography.
//!
//! Contracting every leg of a quantum tensor except one with observables
//! leaves a `chi x chi` matrix on the open leg. On hardware it is rebuilt from
//! the `4^k` Pauli-string expectations on the `k` open qubits; here each
//! expectation is computed exactly and optionally perturbed by shot noise.

use crate::error::{arg, Result};
use crate::pauli::{string_matrix, Pauli};
use crate::tensor::{Matrix, C64};

use super::noise::Meter;
use super::qtensor::QuantumTensor;

/// Where the open leg's `P` enters the reconstruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fold {
    /// Reconstruct on the circuit qubits, then apply `conj(P) M P^T`.
    #[default]
    Result,
    /// Measure `P† sigma P` directly.
    Observable,
}

/// Reconstructed matrix on the open leg, `M[i', i]`.
#[derive(Clone, Debug)]
pub struct MeasurementMatrix {
    pub leg: usize,
    pub matrix: Matrix,
    /// Per-expectation noise level used.
    pub epsilon: f64,
}

/// Pauli strings on `k` qubits in lexicographic order (`I < X < Y < Z`,
/// first qubit most significant), each with its count of `Y` letters.
pub fn pauli_strings(k: usize) -> Vec<(Matrix, usize)> {
    (0..1usize << (2 * k))
        .map(|s| {
            let letters: Vec<Pauli> = (0..k).map(|q| Pauli::ALL[(s >> (2 * (k - 1 - q))) & 3]).collect();
            let ny = letters.iter().filter(|&&p| p == Pauli::Y).count();
            (string_matrix(&letters), ny)
        })
        .collect()
}

/// `C[a', a] = sum_rest conj(psi[a', rest]) phi[a, rest]` over the qubits of
/// leg `l`.
fn cross_matrix(qt: &QuantumTensor, l: usize, psi: &[C64], phi: &[C64]) -> Matrix {
    let n = qt.n_qubits();
    let k = qt.leg_qubits()[l];
    let start = qt.leg_start(l);
    let chi = 1 << k;
    let inner = 1 << (n - start - k);
    let outer = 1 << start;
    let mut c = Matrix::zeros(chi, chi);
    for o in 0..outer {
        for a in 0..chi {
            let pa = &psi[(o * chi + a) * inner..(o * chi + a + 1) * inner];
            for b in 0..chi {
                let pb = &phi[(o * chi + b) * inner..(o * chi + b + 1) * inner];
                c[(a, b)] += pa.iter().zip(pb).map(|(x, y)| x.conj() * y).sum::<C64>();
            }
        }
    }
    c
}

/// Contracts all legs but `open_leg` with `obs` (`None` is identity) and
/// reconstructs the open-leg matrix from Pauli expectations.
///
/// With a meter, tomography noise is drawn once per Pauli string and the
/// `3^k` measurement settings are counted.
pub fn open_link_contraction(
    qt: &QuantumTensor,
    obs: &[Option<Matrix>],
    open_leg: usize,
    fold: Fold,
    meter: Option<&mut Meter>,
) -> Result<MeasurementMatrix> {
    if open_leg >= qt.n_legs() {
        return arg(format!("open leg {open_leg} out of range"));
    }
    if obs.get(open_leg).is_some_and(|o| o.is_some()) {
        return arg(format!("open leg {open_leg} also listed as a contracted leg"));
    }
    let mut folded = qt.folded_observables(obs)?;
    folded[open_leg] = None;
    let psi = qt.state();
    let phi = qt.apply_legs(psi, &folded)?;
    let c = cross_matrix(qt, open_leg, psi, &phi);

    let k = qt.leg_qubits()[open_leg];
    let chi = 1 << k;
    let p = qt.p(open_leg);
    let (mut meter, epsilon) = match meter {
        Some(m) => {
            m.tomography_settings += 3u64.pow(k as u32);
            let eps = if m.noise.tomography_active() { m.noise.epsilon } else { 0.0 };
            (Some(m), eps)
        }
        None => (None, 0.0),
    };
    let mut m = Matrix::zeros(chi, chi);
    for (sigma, ny) in pauli_strings(k) {
        let measured = match fold {
            Fold::Result => sigma.clone(),
            Fold::Observable => p.adjoint() * &sigma * p,
        };
        let mut e = measured.component_mul(&c).sum().re;
        if epsilon > 0.0 {
            if let Some(mt) = meter.as_deref_mut() {
                e += mt.draw(1.0);
            }
        }
        let sign = if ny % 2 == 0 { 1.0 } else { -1.0 };
        m += sigma * C64::new(sign * e / chi as f64, 0.0);
    }
    if fold == Fold::Result {
        m = p.map(|z| z.conj()) * m * p.transpose();
    }
    Ok(MeasurementMatrix {
        leg: open_leg,
        matrix: m,
        epsilon,
    })
}

/// A tensor with one classical index whose slices are quantum states on a
/// shared leg layout: `T[i, ...] = member_i`.
#[derive(Clone, Debug)]
pub struct ClassicalIndexTensor {
    pub members: Vec<QuantumTensor>,
}

/// `M[i', i] = <T_{i'}| ⊗ F_l |T_i>` over the members; with noise, the real
/// and imaginary parts of each entry receive one draw each.
pub fn classical_index_contraction(
    t: &ClassicalIndexTensor,
    obs: &[Option<Matrix>],
    meter: Option<&mut Meter>,
) -> Result<MeasurementMatrix> {
    let Some(first) = t.members.first() else {
        return arg("classical-index tensor has no members");
    };
    if t.members.iter().any(|m| m.leg_qubits() != first.leg_qubits()) {
        return arg("members must share the leg layout");
    }
    let bras: Vec<Vec<C64>> = t
        .members
        .iter()
        .map(|m| m.apply_p(m.state()))
        .collect::<Result<_>>()?;
    let kets: Vec<Vec<C64>> = bras
        .iter()
        .map(|v| first.apply_legs(v, obs))
        .collect::<Result<_>>()?;
    let d = t.members.len();
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = bras[i].iter().zip(&kets[j]).map(|(a, b)| a.conj() * b).sum();
        }
    }
    let mut epsilon = 0.0;
    if let Some(m) = meter {
        m.tomography_settings += (2 * d * d) as u64;
        if m.noise.tomography_active() {
            epsilon = m.noise.epsilon;
            for i in 0..d {
                for j in 0..d {
                    let dr = m.draw(1.0);
                    let di = m.draw(1.0);
                    out[(i, j)] += C64::new(dr, di);
                }
            }
        }
    }
    Ok(MeasurementMatrix {
        leg: usize::MAX,
        matrix: out,
        epsilon,
    })
}

/// Exact open-leg matrix by direct contraction, for checking tomography.
pub fn exact_open_link(qt: &QuantumTensor, obs: &[Option<Matrix>], open_leg: usize) -> Result<Matrix> {
    let t = qt.dense()?;
    let mut ft = t.clone();
    for (l, f) in obs.iter().enumerate() {
        if let Some(f) = f {
            if l == open_leg {
                return arg("open leg also listed as a contracted leg");
            }
            ft = ft.apply_leg(l, f)?;
        }
    }
    let others: Vec<usize> = (0..qt.n_legs()).filter(|&l| l != open_leg).collect();
    let (a, _, _) = t.matricize(&others)?;
    let (b, _, _) = ft.matricize(&others)?;
    Ok(a.adjoint() * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htensor::noise::NoiseModel;
    use crate::qsim::Circuit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_qt(legs: &[usize], seed: u64) -> QuantumTensor {
        let n: usize = legs.iter().sum();
        let c = Circuit::brick_wall(n, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..c.n_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        QuantumTensor::new(c, params, legs.to_vec()).unwrap()
    }

    fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let a = random_matrix(d, rng);
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn pauli_strings_are_ordered() {
        let s = pauli_strings(2);
        assert_eq!(s.len(), 16);
        assert_eq!(s[0].0, Matrix::identity(4, 4));
        assert_eq!(s[1].0, string_matrix(&[Pauli::I, Pauli::X]));
        assert_eq!(s[4].0, string_matrix(&[Pauli::X, Pauli::I]));
        assert_eq!(s[10].1, 2);
    }

    #[test]
    fn tomography_matches_direct_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut qt = random_qt(&[2, 2, 2], 4);
        for l in 0..3 {
            qt.set_p(l, random_matrix(4, &mut rng)).unwrap();
        }
        let obs = vec![Some(random_hermitian(4, &mut rng)), None, Some(random_hermitian(4, &mut rng))];
        let exact = exact_open_link(&qt, &obs, 1).unwrap();
        for fold in [Fold::Result, Fold::Observable] {
            let m = open_link_contraction(&qt, &obs, 1, fold, None).unwrap();
            assert!((&m.matrix - &exact).norm() < 1e-12 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn folds_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut qt = random_qt(&[1, 3], 6);
        qt.set_p(1, random_matrix(8, &mut rng)).unwrap();
        qt.set_p(0, random_matrix(2, &mut rng)).unwrap();
        let obs = vec![Some(random_hermitian(2, &mut rng)), None];
        let a = open_link_contraction(&qt, &obs, 1, Fold::Result, None).unwrap();
        let b = open_link_contraction(&qt, &obs, 1, Fold::Observable, None).unwrap();
        assert!((&a.matrix - &b.matrix).norm() < 1e-12);
    }

    #[test]
    fn open_leg_cannot_be_contracted() {
        let qt = random_qt(&[1, 1], 1);
        let obs = vec![Some(Matrix::identity(2, 2)), None];
        assert!(open_link_contraction(&qt, &obs, 0, Fold::Result, None).is_err());
    }

    #[test]
    fn settings_are_counted_and_noise_is_seeded() {
        let qt = random_qt(&[2, 2], 2);
        let obs = vec![None, None];
        let mut m1 = Meter::new(NoiseModel::both(1e-2, 5));
        let mut m2 = Meter::new(NoiseModel::both(1e-2, 5));
        let a = open_link_contraction(&qt, &obs, 0, Fold::Result, Some(&mut m1)).unwrap();
        let b = open_link_contraction(&qt, &obs, 0, Fold::Result, Some(&mut m2)).unwrap();
        assert_eq!(m1.tomography_settings, 9);
        assert_eq!(a.matrix, b.matrix);
        let exact = exact_open_link(&qt, &obs, 0).unwrap();
        let err = (&a.matrix - &exact).norm();
        assert!(err > 0.0 && err < 0.1);
    }

    #[test]
    fn classical_index_contraction_is_gram_like() {
        let members = vec![random_qt(&[1, 2], 1), random_qt(&[1, 2], 2), random_qt(&[1, 2], 3)];
        let t = ClassicalIndexTensor { members };
        let m = classical_index_contraction(&t, &[None, None], None).unwrap();
        for i in 0..3 {
            assert!((m.matrix[(i, i)].re - 1.0).abs() < 1e-12);
        }
        assert!((&m.matrix - m.matrix.adjoint()).norm() < 1e-12);
    }
}
