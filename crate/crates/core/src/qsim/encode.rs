//! Encoding a target state as a layered ladder circuit by iterative
//! disentangling.
//!
//! Each round truncates the current target to a bond-dimension-2 MPS along the
//! qubit chain, writes that MPS exactly as one ladder layer, and applies the
//! layer's inverse to the target. A layer is kept only if it raises the
//! overlap with `|0...0>`.

use super::circuit::{fidelity, overlap_loss, Circuit};
use super::gates::{kak_params, Gate4, PARAMS_PER_GATE};
use crate::error::{arg, Result};
use crate::optim::{Lbfgs, LbfgsOptions};
use crate::tensor::{svd_matrix, Matrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct EncodeOptions {
    pub layers: usize,
    /// L-BFGS iterations of overlap maximization after extraction; 0 skips.
    pub polish_iters: usize,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self { layers: 1, polish_iters: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Encoded {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    /// `|<circuit state|target>|^2`.
    pub fidelity: f64,
    /// Fidelity after each extracted layer, before polishing.
    pub layer_fidelities: Vec<f64>,
}

/// Right-canonical MPS of bond dimension at most 2: the first tensor as a
/// `1 x (2 r0)` row and the rest as `r_{k-1} x (2 r_k)` row-isometries.
struct Mps2 {
    first: Matrix,
    rest: Vec<(Matrix, usize)>,
}

fn truncate_mps(psi: &[C64], n: usize) -> Mps2 {
    let mut rest = Vec::new();
    let mut right = 1;
    let mut m = Matrix::from_row_slice(1 << (n - 1), 2, psi);
    for _ in 1..n {
        let (u, s, vt) = svd_matrix(&m);
        let r = s.len().min(2);
        let mut b = vt.rows(0, r).into_owned();
        let mut us = Matrix::from_fn(u.nrows(), r, |i, j| u[(i, j)] * s[j]);
        for a in 0..r {
            let (idx, _) = b
                .row(a)
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
            let ph = b[(a, idx)] / b[(a, idx)].norm();
            if ph.is_finite() {
                b.row_mut(a).iter_mut().for_each(|z| *z *= ph.conj());
                us.column_mut(a).iter_mut().for_each(|z| *z *= ph);
            }
        }
        rest.push((b, right));
        right = r;
        let rows = us.nrows();
        let data: Vec<C64> = (0..rows).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| us[(i, j)]).collect();
        m = Matrix::from_row_slice(rows / 2, 2 * r, &data);
    }
    rest.reverse();
    let norm = m.norm();
    if norm > 0.0 {
        m /= C64::from(norm);
    }
    Mps2 { first: m, rest }
}

/// Completes the given columns of a 4x4 matrix to a unitary by Gram-Schmidt
/// over the standard basis, preferring `e_j` for a missing column `j`.
fn complete_unitary(cols: &[Option<[C64; 4]>; 4]) -> Gate4 {
    let mut u = Gate4::zeros();
    let mut set: Vec<[C64; 4]> = Vec::new();
    let orth = |v: [C64; 4], set: &Vec<[C64; 4]>| {
        let mut w = v;
        for _ in 0..2 {
            for s in set {
                let ov: C64 = s.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                w.iter_mut().zip(s).for_each(|(x, y)| *x -= ov * y);
            }
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-6).then(|| w.map(|z| z / n))
    };
    let mut out: [Option<[C64; 4]>; 4] = [None; 4];
    for j in 0..4 {
        if let Some(c) = cols[j] {
            if let Some(w) = orth(c, &set) {
                set.push(w);
                out[j] = Some(w);
            }
        }
    }
    for j in 0..4 {
        if out[j].is_some() {
            continue;
        }
        for cand in std::iter::once(j).chain(0..4) {
            let mut e = [ZERO; 4];
            e[cand] = C64::from(1.0);
            if let Some(w) = orth(e, &set) {
                set.push(w);
                out[j] = Some(w);
                break;
            }
        }
    }
    for (j, c) in out.iter().enumerate() {
        let c = c.expect("basis completion");
        for r in 0..4 {
            u[(r, j)] = c[r];
        }
    }
    u
}

fn column(m: &Matrix, row: usize) -> Option<[C64; 4]> {
    let mut c = [ZERO; 4];
    for (i, z) in m.row(row).iter().enumerate() {
        c[i] = *z;
    }
    (c.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-20).then_some(c)
}

/// Row `row` of an `r x (2 right)` block with entry `(s, b)` moved to `2s + b`.
fn pad_row(m: &Matrix, row: usize, right: usize) -> Matrix {
    Matrix::from_fn(1, 4, |_, j| {
        let (s, b) = (j / 2, j % 2);
        if b < right {
            m[(row, s * right + b)]
        } else {
            ZERO
        }
    })
}

/// Gate matrices of the single ladder layer that prepares the MPS from `|0...0>`.
fn layer_gates(mps: &Mps2, n: usize) -> Vec<Gate4> {
    let merged = |k: usize| {
        // B_{n-2} B_{n-1} as r x 4.
        let (b1, r1) = &mps.rest[k];
        let (b2, _) = &mps.rest[k + 1];
        Matrix::from_fn(b1.nrows(), 4, |a, j| {
            let (s1, s2) = (j / 2, j % 2);
            (0..*r1).map(|m| b1[(a, s1 * r1 + m)] * b2[(m, s2)]).sum()
        })
    };
    let mut gates = Vec::with_capacity(n - 1);
    let first = if n == 2 {
        let f = &mps.first;
        let (b, _) = &mps.rest[0];
        let r0 = f.ncols() / 2;
        Matrix::from_fn(1, 4, |_, j| (0..r0).map(|m| f[(0, (j / 2) * r0 + m)] * b[(m, j % 2)]).sum())
    } else {
        pad_row(&mps.first, 0, mps.first.ncols() / 2)
    };
    gates.push(complete_unitary(&[column(&first, 0), None, None, None]));
    for g in 2..n {
        let block = if g == n - 1 {
            merged(g - 2)
        } else {
            let (b, right) = &mps.rest[g - 2];
            Matrix::from_fn(b.nrows(), 4, |a, j| pad_row(b, a, *right)[(0, j)])
        };
        let mut cols = [None; 4];
        for a in 0..block.nrows().min(2) {
            cols[2 * a] = column(&block, a);
        }
        gates.push(complete_unitary(&cols));
    }
    gates
}

/// Encodes `target` (normalized internally) into an `opts.layers`-layer ladder.
pub fn encode_state(target: &[C64], opts: &EncodeOptions) -> Result<Encoded> {
    let dim = target.len();
    if dim < 4 || !dim.is_power_of_two() {
        return arg("target must have at least two qubits");
    }
    let n = dim.trailing_zeros() as usize;
    let norm = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return arg("zero target state");
    }
    let target: Vec<C64> = target.iter().map(|z| z / norm).collect();
    let layer_circ = Circuit::ladder(n, 1)?;
    let mut current = target.clone();
    let mut best = current[0].norm_sqr();
    let mut layers: Vec<Vec<f64>> = Vec::new();
    let mut layer_fidelities = Vec::new();
    for _ in 0..opts.layers {
        let mps = truncate_mps(&current, n);
        let params: Vec<f64> = layer_gates(&mps, n).iter().flat_map(kak_params).collect();
        let mut next = current.clone();
        layer_circ.apply_adjoint(&params, &mut next)?;
        let f = next[0].norm_sqr();
        if f > best {
            best = f;
            current = next;
            layers.push(params);
        } else {
            layers.push(vec![0.0; layer_circ.n_params()]);
        }
        layer_fidelities.push(best);
    }
    let circuit = Circuit::ladder(n, opts.layers)?;
    let mut params: Vec<f64> = layers.into_iter().rev().flatten().collect();
    let mut fid = fidelity(&target, &circuit.simulate(&params)?);
    if opts.polish_iters > 0 && !params.is_empty() {
        let (p, f) = fit_state(&circuit, &params, &target, opts.polish_iters)?;
        if f > fid {
            fid = f;
            params = p;
        }
    }
    debug_assert_eq!(params.len(), circuit.n_gates() * PARAMS_PER_GATE);
    Ok(Encoded {
        circuit,
        params,
        fidelity: fid,
        layer_fidelities,
    })
}

/// Maximizes `|<target|circuit(params)>|^2` with L-BFGS from `params0`.
/// Returns the best parameters seen and their fidelity.
pub fn fit_state(circuit: &Circuit, params0: &[f64], target: &[C64], iters: usize) -> Result<(Vec<f64>, f64)> {
    if target.len() != 1 << circuit.n_qubits() {
        return arg("target length does not match the circuit");
    }
    let loss = overlap_loss(target);
    let mut f = |x: &[f64]| match circuit.value_and_gradient(x, &mut |psi| Ok(loss(psi))) {
        Ok(v) => v,
        Err(_) => (f64::NAN, vec![0.0; x.len()]),
    };
    let opt = Lbfgs::new(LbfgsOptions {
        max_iters: iters,
        ..Default::default()
    });
    let r = opt.minimize(&mut f, params0);
    let fid = fidelity(target, &circuit.simulate(&r.x)?);
    Ok((r.x, fid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{ground_state, ising_1d};
    use crate::qsim::circuit::zero_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chi2_mps(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let mut rnd = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut psi: Vec<C64> = (0..4).map(|_| rnd()).collect();
        let mut left = 1;
        for _ in 1..n - 1 {
            let a: Vec<C64> = (0..8).map(|_| rnd()).collect();
            let rows = left * 2;
            let mut next = vec![ZERO; rows * 4];
            for l in 0..rows {
                for s in 0..2 {
                    for b in 0..2 {
                        next[(l * 2 + s) * 2 + b] = (0..2).map(|m| psi[l * 2 + m] * a[(m * 2 + s) * 2 + b]).sum();
                    }
                }
            }
            psi = next;
            left = rows;
        }
        let last: Vec<C64> = (0..4).map(|_| rnd()).collect();
        let rows = left * 2;
        let mut out = vec![ZERO; rows * 2];
        for l in 0..rows {
            for s in 0..2 {
                out[l * 2 + s] = (0..2).map(|m| psi[l * 2 + m] * last[m * 2 + s]).sum();
            }
        }
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.iter().map(|z| z / norm).collect()
    }

    #[test]
    fn zero_state_encodes_with_zero_parameters() {
        let e = encode_state(&zero_state(5), &EncodeOptions::default()).unwrap();
        assert!((e.fidelity - 1.0).abs() < 1e-14);
        assert!(e.params.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn bond_two_mps_is_exact_in_one_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3, 4, 6] {
            let psi = random_chi2_mps(n, &mut rng);
            let e = encode_state(&psi, &EncodeOptions::default()).unwrap();
            assert!((e.fidelity - 1.0).abs() < 1e-10, "n={n}: {}", e.fidelity);
        }
    }

    #[test]
    fn fidelity_is_monotone_in_layers() {
        let (_, gs) = ground_state(&ising_1d(8, 1.0, 1.0, true).unwrap()).unwrap();
        let psi: Vec<C64> = gs.iter().copied().collect();
        let f: Vec<f64> = (1..=3)
            .map(|m| encode_state(&psi, &EncodeOptions { layers: m, polish_iters: 0 }).unwrap().fidelity)
            .collect();
        assert!(f[0] > 0.5 && f[1] >= f[0] && f[2] >= f[1], "{f:?}");
        let p = encode_state(&psi, &EncodeOptions { layers: 2, polish_iters: 50 }).unwrap();
        assert!(p.fidelity >= f[1]);
    }

    #[test]
    fn fit_reaches_a_reachable_state() {
        let c = Circuit::brick_wall(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth: Vec<f64> = (0..c.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let target = c.simulate(&truth).unwrap();
        let (_, f) = fit_state(&c, &vec![0.0; c.n_params()], &target, 1000).unwrap();
        assert!(f > 1.0 - 1e-8, "{f}");
    }
}
