//! Quantum tensors: a parametrized circuit state with one matrix `P` per leg.
//!
//! The represented tensor is `T = (P_0 ⊗ P_1 ⊗ ...) |psi(theta)>`, with each
//! leg a contiguous block of qubits and the first leg most significant, so the
//! state vector read in row-major order is the tensor over the legs.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::qsim::{apply_block, Circuit};
use crate::tensor::{Matrix, Tensor, C64, ONE};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Stored", into = "Stored")]
pub struct QuantumTensor {
    circuit: Circuit,
    params: Vec<f64>,
    leg_qubits: Vec<usize>,
    p: Vec<Matrix>,
    state: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct Stored {
    circuit: Circuit,
    params: Vec<f64>,
    leg_qubits: Vec<usize>,
    p: Vec<Matrix>,
}

impl TryFrom<Stored> for QuantumTensor {
    type Error = Error;

    fn try_from(s: Stored) -> Result<Self> {
        let mut qt = Self::new(s.circuit, s.params, s.leg_qubits)?;
        for (l, m) in s.p.into_iter().enumerate() {
            qt.set_p(l, m)?;
        }
        Ok(qt)
    }
}

impl From<QuantumTensor> for Stored {
    fn from(q: QuantumTensor) -> Self {
        Self {
            circuit: q.circuit,
            params: q.params,
            leg_qubits: q.leg_qubits,
            p: q.p,
        }
    }
}

impl QuantumTensor {
    pub fn new(circuit: Circuit, params: Vec<f64>, leg_qubits: Vec<usize>) -> Result<Self> {
        if leg_qubits.iter().sum::<usize>() != circuit.n_qubits() {
            return arg(format!(
                "legs cover {} qubits, circuit has {}",
                leg_qubits.iter().sum::<usize>(),
                circuit.n_qubits()
            ));
        }
        if leg_qubits.iter().any(|&q| q == 0) {
            return arg("every leg needs at least one qubit");
        }
        let state = circuit.simulate(&params)?;
        let p = leg_qubits.iter().map(|&q| Matrix::identity(1 << q, 1 << q)).collect();
        Ok(Self {
            circuit,
            params,
            leg_qubits,
            p,
            state,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn n_legs(&self) -> usize {
        self.leg_qubits.len()
    }

    pub fn leg_qubits(&self) -> &[usize] {
        &self.leg_qubits
    }

    pub fn leg_dims(&self) -> Vec<usize> {
        self.leg_qubits.iter().map(|&q| 1 << q).collect()
    }

    /// First qubit of leg `l`.
    pub fn leg_start(&self, l: usize) -> usize {
        self.leg_qubits[..l].iter().sum()
    }

    /// The circuit output `|psi(theta)>`.
    pub fn state(&self) -> &[C64] {
        &self.state
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        self.state = self.circuit.simulate(&params)?;
        self.params = params;
        Ok(())
    }

    pub fn set_circuit(&mut self, circuit: Circuit, params: Vec<f64>) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits() {
            return arg("replacement circuit has a different qubit count");
        }
        self.state = circuit.simulate(&params)?;
        self.circuit = circuit;
        self.params = params;
        Ok(())
    }

    pub fn p(&self, l: usize) -> &Matrix {
        &self.p[l]
    }

    pub fn p_matrices(&self) -> &[Matrix] {
        &self.p
    }

    pub fn set_p(&mut self, l: usize, m: Matrix) -> Result<()> {
        let d = 1 << self.leg_qubits[l];
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!(
                "P on leg {l} must be {d}x{d}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        self.p[l] = m;
        Ok(())
    }

    /// `P_l <- r P_l`.
    pub fn absorb(&mut self, l: usize, r: &Matrix) -> Result<()> {
        let m = r * &self.p[l];
        self.set_p(l, m)
    }

    pub fn reset_p(&mut self) {
        for (l, &q) in self.leg_qubits.iter().enumerate() {
            self.p[l] = Matrix::identity(1 << q, 1 << q);
        }
    }

    pub fn p_is_identity(&self, tol: f64) -> bool {
        self.p.iter().all(|m| is_identity(m, tol))
    }

    /// Largest Frobenius distance of any `P_l† P_l` from the identity.
    pub fn p_unitarity_defect(&self) -> f64 {
        self.p
            .iter()
            .map(crate::tensor::isometry_defect)
            .fold(0.0, f64::max)
    }

    /// Applies `⊗ m_l` to a state on this tensor's qubits; `None` is identity.
    pub fn apply_legs(&self, psi: &[C64], mats: &[Option<Matrix>]) -> Result<Vec<C64>> {
        let n = self.n_qubits();
        let mut v = psi.to_vec();
        for (l, m) in mats.iter().enumerate() {
            if let Some(m) = m {
                v = apply_block(&v, n, self.leg_start(l), m)?;
            }
        }
        Ok(v)
    }

    /// `(⊗ P_l) psi`.
    pub fn apply_p(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let mats: Vec<Option<Matrix>> = self.p.iter().cloned().map(Some).collect();
        self.apply_legs(psi, &mats)
    }

    /// Dense tensor over the legs.
    pub fn dense(&self) -> Result<Tensor> {
        Tensor::new(self.leg_dims(), self.apply_p(&self.state)?)
    }

    /// `||T||^2 = <psi| ⊗ P_l† P_l |psi>`.
    pub fn norm_sqr(&self) -> Result<f64> {
        let v = self.apply_p(&self.state)?;
        Ok(v.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Multiplies the whole tensor by `s` through `P_0`.
    pub fn scale(&mut self, s: f64) {
        self.p[0] *= C64::new(s, 0.0);
    }

    /// `P_l† F_l P_l` per leg, with `None` for `F = I` and unitary `P`.
    pub fn folded_observables(&self, obs: &[Option<Matrix>]) -> Result<Vec<Option<Matrix>>> {
        if obs.len() != self.n_legs() {
            return arg(format!("{} observables for {} legs", obs.len(), self.n_legs()));
        }
        let mut out = Vec::with_capacity(obs.len());
        for (l, f) in obs.iter().enumerate() {
            let p = &self.p[l];
            let d = p.nrows();
            out.push(match f {
                Some(f) => {
                    if f.nrows() != d || f.ncols() != d {
                        return Err(Error::Dimension(format!("observable on leg {l} must be {d}x{d}")));
                    }
                    Some(p.adjoint() * f * p)
                }
                None => {
                    let g = p.adjoint() * p;
                    if is_identity(&g, 1e-14) {
                        None
                    } else {
                        Some(g)
                    }
                }
            });
        }
        Ok(out)
    }

    /// Exact `<psi| ⊗ P_l† F_l P_l |psi>`; `None` entries are identity.
    pub fn exact_expectation(&self, obs: &[Option<Matrix>]) -> Result<C64> {
        let folded = self.folded_observables(obs)?;
        let v = self.apply_legs(&self.state, &folded)?;
        Ok(self.state.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Identity check used when deciding whether a leg matrix needs applying.
pub(crate) fn is_identity(m: &Matrix, tol: f64) -> bool {
    m.nrows() == m.ncols()
        && m.iter()
            .enumerate()
            .all(|(k, z)| (z - if k % (m.nrows() + 1) == 0 { ONE } else { C64::new(0.0, 0.0) }).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_qt(legs: &[usize], seed: u64) -> QuantumTensor {
        let n: usize = legs.iter().sum();
        let c = Circuit::brick_wall(n, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..c.n_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        QuantumTensor::new(c, params, legs.to_vec()).unwrap()
    }

    #[test]
    fn dense_matches_state_when_p_is_identity() {
        let qt = random_qt(&[2, 1, 2], 1);
        let t = qt.dense().unwrap();
        assert_eq!(t.shape(), &[4, 2, 4]);
        assert_eq!(t.data(), qt.state());
        assert!((qt.norm_sqr().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p_acts_on_its_leg() {
        let mut qt = random_qt(&[2, 2], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Matrix::from_fn(4, 4, |_, _| C64::new(rng.random(), rng.random()));
        let before = qt.dense().unwrap();
        qt.set_p(1, m.clone()).unwrap();
        let after = qt.dense().unwrap();
        assert!(after.sub_norm(&before.apply_leg(1, &m).unwrap()) < 1e-12);
        assert!(qt.set_p(0, Matrix::identity(2, 2)).is_err());
    }

    #[test]
    fn serde_round_trip_restores_state() {
        let mut qt = random_qt(&[1, 2], 3);
        qt.absorb(0, &Matrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0))).unwrap();
        let s = serde_json::to_string(&qt).unwrap();
        let back: QuantumTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back.state(), qt.state());
        assert_eq!(back.p(0), qt.p(0));
        assert_eq!(back.params(), qt.params());
    }

    #[test]
    fn identity_check() {
        assert!(is_identity(&Matrix::identity(4, 4), 0.0));
        let mut m = Matrix::identity(4, 4);
        m[(0, 1)] = C64::new(1e-3, 0.0);
        assert!(!is_identity(&m, 1e-6));
    }
}
