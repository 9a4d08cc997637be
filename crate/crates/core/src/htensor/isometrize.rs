//! Making a quantum tensor isometric toward one of its legs.

use crate::error::Result;
use crate::tensor::{eigh_matrix, Matrix, Tensor};

use super::noise::Meter;
use super::qtensor::QuantumTensor;
use super::tomography::{open_link_contraction, Fold};

/// Split of a positive semidefinite gram `M = R† R` with a pseudo-inverse.
#[derive(Clone, Debug)]
pub struct GramFactor {
    /// `R = sqrt(D) V†`.
    pub r: Matrix,
    /// `R^+ = V pinv(sqrt(D))`.
    pub r_pinv: Matrix,
    /// Eigenvalues of `M`, ascending, negative values clamped to zero.
    pub spectrum: Vec<f64>,
}

/// Factors a Hermitian gram; eigenvalues below `rel_cutoff * max` are
/// treated as zero in the pseudo-inverse.
pub fn factor_gram(m: &Matrix, rel_cutoff: f64) -> Result<GramFactor> {
    let e = eigh_matrix(m)?;
    let d: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let n = d.len();
    let mut r = e.vectors.adjoint();
    let mut r_pinv = e.vectors.clone();
    for k in 0..n {
        let s = d[k].sqrt();
        r.row_mut(k).iter_mut().for_each(|z| *z *= s);
        let inv = if d[k] > rel_cutoff * max && s > 0.0 { 1.0 / s } else { 0.0 };
        r_pinv.column_mut(k).iter_mut().for_each(|z| *z *= inv);
    }
    Ok(GramFactor { r, r_pinv, spectrum: d })
}

/// Measures the gram on `leg` by tomography, sets `P_leg <- (R^+)^T P_leg`
/// and returns `R` for the neighbor to absorb.
///
/// Other legs are treated as contracted with isometric neighbors, so their
/// observables are the identity. Each measured gram is refactored once
/// classically. A gram with condition number above
/// `TOL.remeasure_condition` loses `eps * cond(M)` of accuracy, so the
/// updated tensor is then measured and factored a second time.
pub fn implicit_isometrize(qt: &mut QuantumTensor, leg: usize, fold: Fold, mut meter: Option<&mut Meter>) -> Result<Matrix> {
    let (r, cond) = isometrize_pass(qt, leg, fold, meter.as_deref_mut())?;
    if cond <= crate::consts::TOL.remeasure_condition {
        return Ok(r);
    }
    let (r2, _) = isometrize_pass(qt, leg, fold, meter)?;
    Ok(r2 * r)
}

/// One measured pass; returns `R` and the condition number of the kept spectrum.
fn isometrize_pass(qt: &mut QuantumTensor, leg: usize, fold: Fold, meter: Option<&mut Meter>) -> Result<(Matrix, f64)> {
    let obs = vec![None; qt.n_legs()];
    let m = open_link_contraction(qt, &obs, leg, fold, meter)?.matrix;
    let cutoff = crate::consts::TOL.pseudo_inverse;
    let f = factor_gram(&m, cutoff)?;
    let a = f.r_pinv.transpose();
    let w = a.conjugate() * &m * a.transpose();
    let g = factor_gram(&w, cutoff)?;
    qt.absorb(leg, &(g.r_pinv.transpose() * a))?;
    let max = f.spectrum.iter().copied().fold(0.0, f64::max);
    let min = f.spectrum.iter().copied().filter(|&x| x > cutoff * max).fold(f64::INFINITY, f64::min);
    Ok((g.r * f.r, max / min))
}

/// Moves the orthogonality center out of a quantum tensor into a classical
/// neighbor tensor whose leg `neighbor_leg` is linked to `leg`.
pub fn absorb_r(neighbor: &Tensor, neighbor_leg: usize, r: &Matrix) -> Result<Tensor> {
    neighbor.apply_leg(neighbor_leg, r)
}

/// `<psi| ⊗ P† P |psi>` scaled to one by rescaling `P_0`.
pub fn renormalize(qt: &mut QuantumTensor) -> Result<f64> {
    let n = qt.norm_sqr()?.sqrt();
    if n > 0.0 {
        qt.scale(1.0 / n);
    }
    Ok(n)
}
