//! Expectation values of product observables on quantum tensors.

use crate::error::{arg, Result};
use crate::tensor::{eigh_matrix, svd_matrix, Matrix, C64};

use super::noise::Meter;
use super::qtensor::QuantumTensor;

/// Measurement of a product of Hermitian leg observables in one setting:
/// rotate each leg by `bases[l]`, read computational-basis outcomes and
/// weight them by `diagonals[l]`.
#[derive(Clone, Debug)]
pub struct MeasurementPlan {
    /// Basis change `V_l†` appended to the circuit on leg `l`.
    pub bases: Vec<Option<Matrix>>,
    /// Eigenvalues of leg `l`'s observable in computational-basis order.
    pub diagonals: Vec<Option<Vec<f64>>>,
    pub settings: usize,
}

/// Diagonalizes each leg observable (`None` is identity).
pub fn local_diagonalize(obs: &[Option<Matrix>]) -> Result<MeasurementPlan> {
    let mut bases = Vec::with_capacity(obs.len());
    let mut diagonals = Vec::with_capacity(obs.len());
    for o in obs {
        match o {
            Some(m) => {
                if !crate::tensor::is_hermitian(m, 1e-10 * m.norm().max(1.0)) {
                    return arg("leg observable is not Hermitian");
                }
                let e = eigh_matrix(m)?;
                bases.push(Some(e.vectors.adjoint()));
                diagonals.push(Some(e.values));
            }
            None => {
                bases.push(None);
                diagonals.push(None);
            }
        }
    }
    Ok(MeasurementPlan {
        bases,
        diagonals,
        settings: 1,
    })
}

impl MeasurementPlan {
    /// Outcome-weighted average over the rotated state's probabilities.
    pub fn evaluate(&self, qt: &QuantumTensor, psi: &[C64]) -> Result<f64> {
        if self.bases.len() != qt.n_legs() {
            return arg("plan and tensor disagree on the number of legs");
        }
        let rotated = qt.apply_legs(psi, &self.bases)?;
        let dims = qt.leg_dims();
        let mut total = 0.0;
        for (idx, amp) in rotated.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut w = 1.0;
            let mut rest = idx;
            for l in (0..dims.len()).rev() {
                let b = rest % dims[l];
                rest /= dims[l];
                if let Some(d) = &self.diagonals[l] {
                    w *= d[b];
                }
            }
            total += p * w;
        }
        Ok(total)
    }
}

/// `<psi| ⊗ P_l† F_l P_l |psi>` through the local-diagonalization pipeline.
///
/// With a meter whose VQE noise is active, one draw scaled by the Pauli
/// weight `prod_l ||P_l† F_l P_l||_F / sqrt(d_l)` is added.
pub fn expect_qt(qt: &QuantumTensor, obs: &[Option<Matrix>], meter: Option<&mut Meter>) -> Result<f64> {
    let folded = qt.folded_observables(obs)?;
    let plan = local_diagonalize(&folded)?;
    let mut v = plan.evaluate(qt, qt.state())?;
    if let Some(m) = meter {
        if m.noise.vqe_active() {
            v += m.draw(pauli_weight(&folded));
        }
    }
    Ok(v)
}

/// Closest unitary in Frobenius norm, `U V†` from `P = U S V†`.
pub fn project_to_unitary(p: &Matrix) -> Result<Matrix> {
    if p.nrows() != p.ncols() {
        return arg("projection needs a square matrix");
    }
    let (u, _, vt) = svd_matrix(p);
    Ok(u * vt)
}

/// Order of a classical-quantum contraction over an open quantum leg.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContractionOrder {
    /// Contract the classical side first: one product observable per setting.
    ClassicalFirst,
    /// Reconstruct the open leg by tomography first.
    QuantumFirst,
}

/// Measurement settings for contracting an open leg of `q` qubits with `m`
/// classical product terms: `(classical-first, quantum-first)` is `(m, m 3^q)`.
pub fn plan_contraction(q: u32, m: u64) -> (u64, u64) {
    (m, m * 3u64.pow(q))
}

/// Settings a given order costs.
pub fn settings_for(order: ContractionOrder, q: u32, m: u64) -> u64 {
    let (a, b) = plan_contraction(q, m);
    match order {
        ContractionOrder::ClassicalFirst => a,
        ContractionOrder::QuantumFirst => b,
    }
}

/// `sqrt(sum |c_sigma|^2)` of a leg-product observable expanded in Pauli
/// strings, computed as `prod_l ||F_l||_F / sqrt(d_l)`.
pub fn pauli_weight(obs: &[Option<Matrix>]) -> f64 {
    obs.iter()
        .map(|f| f.as_ref().map_or(1.0, |f| f.norm() / (f.nrows() as f64).sqrt()))
        .product()
}
