//! Variational optimization of a quantum tensor at the orthogonality center.
//!
//! With every neighbor isometric toward the quantum tensor, the energy is
//! `<psi| P† H_eff P |psi>` and the norm is `<psi| P† P |psi>`. When the `P`
//! matrices are not unitary the norm is only held near one by the penalty
//! `lambda |<psi|P†P|psi> - 1|`.

use serde::{Deserialize, Serialize};

use crate::consts::TOL;
use crate::error::{arg, Error, Result};
use crate::optim::{Lbfgs, LbfgsOptions};
use crate::qsim::{BlockOperator, BlockTerm, Observable};
use crate::tensor::{Matrix, C64, ONE, ZERO};
use crate::ttn::EffectiveHamiltonian;

use super::measure::project_to_unitary;
use super::noise::Meter;
use super::qtensor::{is_identity, QuantumTensor};

/// Handling of non-unitary `P` matrices before a quantum tensor is optimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Keep `P` and penalize the norm deviation.
    #[serde(rename = "i")]
    Penalty,
    /// Replace every `P` by its closest unitary.
    #[serde(rename = "ii")]
    Unitary,
    /// Rebuild the circuit from an optimized classical approximation and
    /// reset `P` to the identity.
    #[serde(rename = "iii")]
    Reinit,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Self::Penalty),
            "ii" => Ok(Self::Unitary),
            "iii" => Ok(Self::Reinit),
            _ => arg(format!("unknown strategy {s:?}; expected i, ii or iii")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VqeOptions {
    pub max_iters: usize,
    /// Penalty weight; only used when some `P` is not unitary.
    pub lambda: f64,
    pub gtol: f64,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            lambda: 1000.0,
            gtol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VqeReport {
    /// Loss after each accepted optimizer iteration, as measured.
    pub losses: Vec<f64>,
    /// Exact loss before and after optimization.
    pub initial: f64,
    pub final_loss: f64,
    /// Exact `<psi|P†HP|psi> / <psi|P†P|psi>` after optimization.
    pub energy: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub diverged: bool,
}

/// `P† H_eff P` and `P† P` as block operators on the circuit qubits.
#[derive(Clone, Debug)]
pub struct FoldedHamiltonian {
    pub energy: BlockOperator,
    pub norm: BlockOperator,
    /// `sqrt(sum_sigma |c_sigma|^2)` of the folded energy operator, summed
    /// term by term before merging.
    pub pauli_weight: f64,
}

/// Blocks `P† F P` per leg; idle legs contribute `P† P` unless it is the
/// identity to reconstruction tolerance.
fn leg_blocks(qt: &QuantumTensor, factors: &[Option<Matrix>]) -> Vec<(usize, Matrix)> {
    let mut out = Vec::new();
    for (l, f) in factors.iter().enumerate() {
        let p = qt.p(l);
        let (m, tol) = match f {
            Some(f) => (p.adjoint() * f * p, 0.0),
            None => (p.adjoint() * p, TOL.reconstruction),
        };
        if !is_identity(&m, tol) {
            out.push((qt.leg_start(l), m));
        }
    }
    out
}

/// Folds the `P` matrices into the effective Hamiltonian, merging terms that
/// act on a single leg.
pub fn fold_hamiltonian(qt: &QuantumTensor, heff: &EffectiveHamiltonian) -> Result<FoldedHamiltonian> {
    if heff.dims != qt.leg_dims() {
        return Err(Error::Dimension(format!(
            "effective Hamiltonian dims {:?} vs quantum legs {:?}",
            heff.dims,
            qt.leg_dims()
        )));
    }
    if !heff.has_identity_norm() {
        return arg("quantum centers require isometric neighbors");
    }
    let k = qt.n_legs();
    let none: Vec<Option<Matrix>> = vec![None; k];
    let mut constant = heff.constant;
    let mut single: Vec<Option<Matrix>> = vec![None; k];
    let mut terms = Vec::new();
    let mut weight2 = 0.0;
    for (c, f) in &heff.terms {
        let folded: Vec<f64> = f
            .iter()
            .enumerate()
            .map(|(l, m)| {
                let p = qt.p(l);
                let d = p.nrows() as f64;
                let x = match m {
                    Some(m) => p.adjoint() * m * p,
                    None => p.adjoint() * p,
                };
                x.norm_squared() / d
            })
            .collect();
        weight2 += c.norm_sqr() * folded.iter().product::<f64>();
        let active: Vec<usize> = (0..k).filter(|&l| f[l].is_some()).collect();
        match active.as_slice() {
            [] => constant += c,
            [l] => {
                let add = f[*l].as_ref().expect("active") * *c;
                single[*l] = Some(match single[*l].take() {
                    Some(s) => s + add,
                    None => add,
                });
            }
            _ => terms.push(BlockTerm {
                coeff: *c,
                factors: leg_blocks(qt, f),
            }),
        }
    }
    for (l, s) in single.into_iter().enumerate() {
        if let Some(s) = s {
            let mut f = none.clone();
            f[l] = Some(s);
            terms.push(BlockTerm {
                coeff: ONE,
                factors: leg_blocks(qt, &f),
            });
        }
    }
    let norm_blocks = leg_blocks(qt, &none);
    if constant != ZERO {
        terms.push(BlockTerm {
            coeff: constant,
            factors: norm_blocks.clone(),
        });
    }
    let n = qt.n_qubits();
    Ok(FoldedHamiltonian {
        energy: BlockOperator { n_qubits: n, terms },
        norm: BlockOperator {
            n_qubits: n,
            terms: vec![BlockTerm {
                coeff: ONE,
                factors: norm_blocks,
            }],
        },
        pauli_weight: weight2.sqrt(),
    })
}

fn inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().re
}

/// Loss `<psi|P†HP|psi> + lambda |<psi|P†P|psi> - 1|` and its adjoint
/// `dL/d(conj psi)`; the penalty's subgradient is zero at the kink.
pub fn loss_and_adjoint(h: &FoldedHamiltonian, lambda: f64, psi: &[C64]) -> Result<(f64, Vec<C64>)> {
    let hp = h.energy.apply(psi)?;
    let mut value = inner(psi, &hp);
    let mut adj = hp;
    if lambda != 0.0 {
        let np = h.norm.apply(psi)?;
        let dev = inner(psi, &np) - 1.0;
        value += lambda * dev.abs();
        let s = lambda * if dev > 0.0 { 1.0 } else if dev < 0.0 { -1.0 } else { 0.0 };
        if s != 0.0 {
            adj.iter_mut().zip(&np).for_each(|(a, b)| *a += b * s);
        }
    }
    Ok((value, adj))
}

/// Loss at the tensor's current parameters.
pub fn loss(qt: &QuantumTensor, heff: &EffectiveHamiltonian, lambda: f64) -> Result<f64> {
    let h = fold_hamiltonian(qt, heff)?;
    Ok(loss_and_adjoint(&h, lambda, qt.state())?.0)
}

/// Replaces every `P` by its closest unitary.
pub fn project_all(qt: &mut QuantumTensor) -> Result<()> {
    for l in 0..qt.n_legs() {
        let u = project_to_unitary(qt.p(l))?;
        qt.set_p(l, u)?;
    }
    Ok(())
}

/// Minimizes the loss over circuit parameters with L-BFGS, keeping the best
/// parameters seen. With VQE noise active, every loss value and gradient
/// component receives one draw scaled by the folded operator's Pauli weight.
pub fn vqe_optimize(
    qt: &mut QuantumTensor,
    heff: &EffectiveHamiltonian,
    opts: &VqeOptions,
    meter: &mut Meter,
) -> Result<VqeReport> {
    let h = fold_hamiltonian(qt, heff)?;
    let lambda = if qt.p_unitarity_defect() > 1e-9 { opts.lambda } else { 0.0 };
    let circuit = qt.circuit().clone();
    let initial = loss_and_adjoint(&h, lambda, qt.state())?.0;
    let noisy = meter.noise.vqe_active();
    let scale = h.pauli_weight;
    let mut objective = |x: &[f64]| -> (f64, Vec<f64>) {
        meter.vqe_evaluations += 1;
        match circuit.value_and_gradient(x, &mut |psi| loss_and_adjoint(&h, lambda, psi)) {
            Ok((mut v, mut g)) => {
                if noisy {
                    v += meter.draw(scale);
                    g.iter_mut().for_each(|gi| *gi += meter.draw(scale));
                }
                (v, g)
            }
            Err(_) => (f64::NAN, vec![0.0; x.len()]),
        }
    };
    let lb = Lbfgs::new(LbfgsOptions {
        max_iters: opts.max_iters,
        gtol: opts.gtol,
        ..LbfgsOptions::default()
    });
    let res = lb.minimize(&mut objective, qt.params());
    qt.set_params(res.x)?;
    let final_loss = loss_and_adjoint(&h, lambda, qt.state())?.0;
    let psi = qt.state();
    let energy = inner(psi, &h.energy.apply(psi)?) / inner(psi, &h.norm.apply(psi)?);
    if !noisy && final_loss > initial + 1e-12 {
        return Err(Error::Diverged(format!("loss rose from {initial} to {final_loss}")));
    }
    Ok(VqeReport {
        losses: res.trace,
        initial,
        final_loss,
        energy,
        iterations: res.iterations,
        evaluations: res.evaluations,
        diverged: res.diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Circuit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_qt(legs: &[usize], layers: usize, seed: u64) -> QuantumTensor {
        let n: usize = legs.iter().sum();
        let c = Circuit::ladder(n, layers).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..c.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        QuantumTensor::new(c, params, legs.to_vec()).unwrap()
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let a = Matrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn random_heff(dims: &[usize], seed: u64) -> EffectiveHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for l in 0..dims.len() {
            let mut f = vec![None; dims.len()];
            f[l] = Some(random_hermitian(dims[l], &mut rng));
            terms.push((C64::new(0.7, 0.0), f.clone()));
            terms.push((C64::new(-0.3, 0.0), f));
        }
        let mut f = vec![None; dims.len()];
        f[0] = Some(random_hermitian(dims[0], &mut rng));
        f[1] = Some(random_hermitian(dims[1], &mut rng));
        terms.push((C64::new(1.1, 0.0), f));
        EffectiveHamiltonian {
            dims: dims.to_vec(),
            terms,
            norms: vec![None; dims.len()],
            constant: C64::new(0.25, 0.0),
        }
    }

    fn dense_energy(qt: &QuantumTensor, heff: &EffectiveHamiltonian) -> f64 {
        let t = qt.dense().unwrap();
        heff.apply(&t).unwrap().inner(&t).re
    }

    #[test]
    fn folded_energy_matches_dense_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut qt = random_qt(&[2, 1, 2], 2, 3);
        qt.set_p(1, Matrix::from_fn(2, 2, |_, _| C64::new(rng.random(), rng.random()))).unwrap();
        let heff = random_heff(&qt.leg_dims(), 5);
        let h = fold_hamiltonian(&qt, &heff).unwrap();
        let psi = qt.state();
        let e = inner(psi, &h.energy.apply(psi).unwrap());
        assert!((e - dense_energy(&qt, &heff)).abs() < 1e-12);
        let n = inner(psi, &h.norm.apply(psi).unwrap());
        assert!((n - qt.norm_sqr().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn trivial_loss_is_one() {
        let qt = random_qt(&[1, 2], 1, 1);
        let heff = EffectiveHamiltonian {
            dims: qt.leg_dims(),
            terms: vec![],
            norms: vec![None, None],
            constant: ONE,
        };
        assert!((loss(&qt, &heff, 5.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_for_scaled_p() {
        let mut qt = random_qt(&[1, 1], 1, 2);
        qt.set_p(0, Matrix::identity(2, 2) * C64::new(2.0, 0.0)).unwrap();
        let heff = EffectiveHamiltonian {
            dims: qt.leg_dims(),
            terms: vec![],
            norms: vec![None, None],
            constant: ZERO,
        };
        assert!((loss(&qt, &heff, 1.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn optimization_lowers_energy_to_ground_state() {
        let qt0 = random_qt(&[1, 1, 1], 3, 7);
        let heff = random_heff(&qt0.leg_dims(), 8);
        let exact = crate::ttn::lowest_eigenvector(&heff.assemble().unwrap()).unwrap().0;
        let mut qt = qt0.clone();
        let rep = vqe_optimize(&mut qt, &heff, &VqeOptions::default(), &mut Meter::default()).unwrap();
        assert!(rep.final_loss <= rep.initial);
        assert!((rep.energy - exact).abs() < 1e-6, "{} vs {exact}", rep.energy);
    }

    #[test]
    fn projection_is_continuous_for_unitary_p() {
        let mut qt = random_qt(&[2, 2], 1, 3);
        let heff = random_heff(&qt.leg_dims(), 2);
        let u = project_to_unitary(&Matrix::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64 % 3.0, 1.0))).unwrap();
        qt.set_p(0, u).unwrap();
        let before = loss(&qt, &heff, 1000.0).unwrap();
        project_all(&mut qt).unwrap();
        let after = loss(&qt, &heff, 1000.0).unwrap();
        assert!((before - after).abs() < 1e-8);
    }

    #[test]
    fn strategy_names() {
        assert_eq!("ii".parse::<Strategy>().unwrap(), Strategy::Unitary);
        assert!("iv".parse::<Strategy>().is_err());
    }
}
