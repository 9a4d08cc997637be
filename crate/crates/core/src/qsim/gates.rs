//! Generic two-qubit gates in Cartan (KAK) form.
//!
//! Parameter layout, 15 reals:
//! `[b1 (3), b2 (3), theta_x, theta_y, theta_z, a1 (3), a2 (3)]` with
//! `U = (A1 x A2) exp(i(tx XX + ty YY + tz ZZ)) (B1 x B2)` and every local
//! factor `Rz(p0) Ry(p1) Rz(p2)`.

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Result};
use crate::optim::{Lbfgs, LbfgsOptions};
use crate::tensor::{Matrix, C64, I, ONE, ZERO};

pub const PARAMS_PER_GATE: usize = 15;

pub type Gate4 = Matrix4<C64>;
type M2 = Matrix2<C64>;

fn pauli2(k: usize) -> M2 {
    match k {
        0 => M2::new(ZERO, ONE, ONE, ZERO),
        1 => M2::new(ZERO, -I, I, ZERO),
        _ => M2::new(ONE, ZERO, ZERO, -ONE),
    }
}

fn rz(a: f64) -> M2 {
    let h = 0.5 * a;
    M2::new(C64::from_polar(1.0, -h), ZERO, ZERO, C64::from_polar(1.0, h))
}

fn ry(b: f64) -> M2 {
    let (s, c) = (0.5 * b).sin_cos();
    M2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
}

/// `Rz(p0) Ry(p1) Rz(p2)` and its three partial derivatives.
fn local(p: &[f64]) -> (M2, [M2; 3]) {
    let (za, yb, zc) = (rz(p[0]), ry(p[1]), rz(p[2]));
    let hz = pauli2(2) * C64::new(0.0, -0.5);
    let hy = pauli2(1) * C64::new(0.0, -0.5);
    let u = za * yb * zc;
    (u, [hz * u, za * hy * yb * zc, u * hz])
}

fn kron2(a: &M2, b: &M2) -> Gate4 {
    Gate4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

fn pp(k: usize) -> Gate4 {
    let p = pauli2(k);
    kron2(&p, &p)
}

/// `exp(i(tx XX + ty YY + tz ZZ))` and its three partial derivatives.
fn interaction(t: &[f64]) -> (Gate4, [Gate4; 3]) {
    let e = |k: usize| {
        let (s, c) = t[k].sin_cos();
        Gate4::identity() * C64::from(c) + pp(k) * C64::new(0.0, s)
    };
    let n = e(0) * e(1) * e(2);
    (n, [pp(0) * n * I, pp(1) * n * I, pp(2) * n * I])
}

/// The gate matrix with the qubit listed first as the more significant bit.
pub fn cartan(theta: &[f64]) -> Gate4 {
    let (b1, _) = local(&theta[0..3]);
    let (b2, _) = local(&theta[3..6]);
    let (n, _) = interaction(&theta[6..9]);
    let (a1, _) = local(&theta[9..12]);
    let (a2, _) = local(&theta[12..15]);
    kron2(&a1, &a2) * n * kron2(&b1, &b2)
}

/// Gate matrix and all 15 partial derivatives.
pub fn cartan_with_derivatives(theta: &[f64]) -> (Gate4, [Gate4; PARAMS_PER_GATE]) {
    let (b1, db1) = local(&theta[0..3]);
    let (b2, db2) = local(&theta[3..6]);
    let (n, dn) = interaction(&theta[6..9]);
    let (a1, da1) = local(&theta[9..12]);
    let (a2, da2) = local(&theta[12..15]);
    let a = kron2(&a1, &a2);
    let b = kron2(&b1, &b2);
    let an = a * n;
    let nb = n * b;
    let mut d = [Gate4::zeros(); PARAMS_PER_GATE];
    for k in 0..3 {
        d[k] = an * kron2(&db1[k], &b2);
        d[3 + k] = an * kron2(&b1, &db2[k]);
        d[6 + k] = a * dn[k] * b;
        d[9 + k] = kron2(&da1[k], &a2) * nb;
        d[12 + k] = kron2(&a1, &da2[k]) * nb;
    }
    (an * b, d)
}

/// Checked entry point returning a dynamic matrix.
pub fn cartan_unitary(theta: &[f64]) -> Result<Matrix> {
    if theta.len() != PARAMS_PER_GATE {
        return arg(format!("a Cartan gate takes {PARAMS_PER_GATE} parameters, got {}", theta.len()));
    }
    let g = cartan(theta);
    Ok(Matrix::from_fn(4, 4, |r, c| g[(r, c)]))
}

pub fn to_gate4(m: &Matrix) -> Result<Gate4> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return arg("expected a 4x4 matrix");
    }
    Ok(Gate4::from_fn(|r, c| m[(r, c)]))
}

/// `|tr(U^dag V)| / 4`, one for equality up to global phase.
pub fn phase_fidelity(u: &Gate4, v: &Gate4) -> f64 {
    (u.adjoint() * v).trace().norm() / 4.0
}

fn magic() -> Gate4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, i, z) = (C64::from(s), C64::new(0.0, s), ZERO);
    Gate4::new(o, i, z, z, z, z, i, o, z, z, i, -o, o, -i, z, z)
}

/// Splits `k ~ A x B` (up to phase) using the largest 2x2 block.
fn split_product(k: &Gate4) -> (M2, M2) {
    let block = |i: usize, j: usize| {
        M2::new(
            k[(2 * i, 2 * j)],
            k[(2 * i, 2 * j + 1)],
            k[(2 * i + 1, 2 * j)],
            k[(2 * i + 1, 2 * j + 1)],
        )
    };
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).norm();
            if n > best {
                best = n;
                bi = i;
                bj = j;
            }
        }
    }
    let mut b = block(bi, bj);
    let det = b.determinant();
    b /= det.sqrt();
    let bd = b.adjoint();
    let a = M2::from_fn(|i, j| (bd * block(i, j)).trace() * 0.5);
    (a, b)
}

/// ZYZ angles of a 2x2 unitary, up to global phase.
fn zyz(u: &M2) -> [f64; 3] {
    let u = u / u.determinant().sqrt();
    let (a, b) = (u[(0, 0)], u[(0, 1)]);
    let beta = 2.0 * b.norm().atan2(a.norm());
    let (mut sum, mut diff) = (0.0, 0.0);
    if a.norm() > 1e-12 {
        sum = -2.0 * a.arg();
    }
    if b.norm() > 1e-12 {
        diff = -2.0 * (-b).arg();
    }
    [(sum + diff) / 2.0, beta, (sum - diff) / 2.0]
}

/// Parameters reproducing `u` up to a global phase.
pub fn kak_params(u: &Gate4) -> [f64; PARAMS_PER_GATE] {
    if (u.trace().norm() / 4.0 - 1.0).abs() < 1e-13 {
        return [0.0; PARAMS_PER_GATE];
    }
    if let Some(p) = kak_analytic(u) {
        if 1.0 - phase_fidelity(&cartan(&p), u) < 1e-12 {
            return p;
        }
    }
    kak_numeric(u)
}

fn kak_analytic(u: &Gate4) -> Option<[f64; PARAMS_PER_GATE]> {
    let det = u.determinant();
    if det.norm() < 1e-12 {
        return None;
    }
    let su = u / det.powf(0.25);
    let bm = magic();
    let ub = bm.adjoint() * su * bm;
    let m2 = ub.transpose() * ub;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let re = m2.map(|z| z.re);
    let im = m2.map(|z| z.im);
    let mut found = None;
    for _ in 0..20 {
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let mix = re * x + im * y;
        let eig = mix.symmetric_eigen();
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            p.column_mut(0).neg_mut();
        }
        let pc = p.map(C64::from);
        let d = pc.transpose() * m2 * pc;
        let off: f64 = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| d[(r, c)].norm_sqr())
            .sum();
        if off.sqrt() < 1e-10 {
            found = Some((pc, d));
            break;
        }
    }
    let (pc, d) = found?;
    let mut half: Vec<C64> = (0..4).map(|k| d[(k, k)].sqrt()).collect();
    let prod: C64 = half.iter().product();
    if prod.re < 0.0 {
        half[0] = -half[0];
    }
    let dinv = Gate4::from_diagonal(&nalgebra::Vector4::from_iterator(half.iter().map(|z| z.inv())));
    let k1 = bm * (ub * pc * dinv) * bm.adjoint();
    let k2 = bm * pc.transpose() * bm.adjoint();
    let (a1, a2) = split_product(&k1);
    let (b1, b2) = split_product(&k2);

    // Diagonal of XX, YY, ZZ in the magic basis fixes the interaction angles.
    let diag = |k: usize| {
        let m = bm.adjoint() * pp(k) * bm;
        [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re]
    };
    let (dx, dy, dz) = (diag(0), diag(1), diag(2));
    let sys = nalgebra::Matrix4::<f64>::from_fn(|r, c| match c {
        0 => 1.0,
        1 => dx[r],
        2 => dy[r],
        _ => dz[r],
    });
    let rhs = nalgebra::Vector4::from_iterator(half.iter().map(|z| z.arg()));
    let sol = sys.lu().solve(&rhs)?;

    let mut p = [0.0; PARAMS_PER_GATE];
    p[0..3].copy_from_slice(&zyz(&b1));
    p[3..6].copy_from_slice(&zyz(&b2));
    p[6] = sol[1];
    p[7] = sol[2];
    p[8] = sol[3];
    p[9..12].copy_from_slice(&zyz(&a1));
    p[12..15].copy_from_slice(&zyz(&a2));
    Some(p)
}

/// Fallback: maximize the phase-insensitive overlap `|tr(U^dag V)|^2`.
fn kak_numeric(u: &Gate4) -> [f64; PARAMS_PER_GATE] {
    let target = *u;
    let mut best = [0.0; PARAMS_PER_GATE];
    let mut best_val = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..8 {
        let x0: Vec<f64> = (0..PARAMS_PER_GATE).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut f = |x: &[f64]| {
            let (g, d) = cartan_with_derivatives(x);
            let t = (target.adjoint() * g).trace();
            let val = 1.0 - t.norm_sqr() / 16.0;
            let grad = d
                .iter()
                .map(|dk| -2.0 * (t.conj() * (target.adjoint() * dk).trace()).re / 16.0)
                .collect();
            (val, grad)
        };
        let res = Lbfgs::new(LbfgsOptions {
            max_iters: 2000,
            gtol: 1e-14,
            ..Default::default()
        })
        .minimize(&mut f, &x0);
        if res.value < best_val {
            best_val = res.value;
            best.copy_from_slice(&res.x);
        }
        if best_val < 1e-14 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..PARAMS_PER_GATE).map(|_| rng.random_range(-3.5..3.5)).collect()
    }

    #[test]
    fn zero_parameters_give_identity() {
        assert!((cartan(&[0.0; 15]) - Gate4::identity()).norm() < 1e-15);
        assert!(cartan_unitary(&[0.0; 14]).is_err());
    }

    #[test]
    fn random_parameters_give_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let u = cartan(&random_params(&mut rng));
            assert!((u.adjoint() * u - Gate4::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn pure_xx_interaction_matches_matrix_exponential() {
        let mut p = [0.0; 15];
        p[6] = std::f64::consts::FRAC_PI_4;
        let h = pp(0) * C64::new(0.0, std::f64::consts::FRAC_PI_4);
        // Taylor series of exp(h) as an independent oracle.
        let mut term = Gate4::identity();
        let mut sum = Gate4::identity();
        for k in 1..40 {
            term = term * h / C64::from(k as f64);
            sum += term;
        }
        assert!((cartan(&p) - sum).norm() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_params(&mut rng);
        let (_, d) = cartan_with_derivatives(&p);
        for k in 0..15 {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[k] += 1e-6;
            lo[k] -= 1e-6;
            let fd = (cartan(&hi) - cartan(&lo)) / C64::from(2e-6);
            assert!((fd - d[k]).norm() < 1e-8, "param {k}");
        }
    }

    #[test]
    fn magic_basis_properties() {
        let bm = magic();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = random_params(&mut rng);
        p[6..9].iter_mut().for_each(|v| *v = 0.0);
        let local = cartan(&p);
        let local = local / local.determinant().powf(0.25);
        let m = bm.adjoint() * local * bm;
        assert!(m.iter().all(|z| z.im.abs() < 1e-12));
        for k in 0..3 {
            let d = bm.adjoint() * pp(k) * bm;
            for r in 0..4 {
                for c in 0..4 {
                    if r != c {
                        assert!(d[(r, c)].norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn kak_recovers_random_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let u = cartan(&random_params(&mut rng)) * C64::from_polar(1.0, rng.random::<f64>());
            let p = kak_params(&u);
            assert!(1.0 - phase_fidelity(&cartan(&p), &u) < 1e-12);
        }
    }

    #[test]
    fn kak_handles_special_gates() {
        let swap = Gate4::from_fn(|r, c| {
            let t = [0, 2, 1, 3][c];
            if r == t { ONE } else { ZERO }
        });
        let cnot = Gate4::from_fn(|r, c| {
            let t = [0, 1, 3, 2][c];
            if r == t { ONE } else { ZERO }
        });
        for g in [swap, cnot, Gate4::identity(), kron2(&pauli2(0), &pauli2(2))] {
            let p = kak_params(&g);
            assert!(1.0 - phase_fidelity(&cartan(&p), &g) < 1e-12);
        }
        assert_eq!(kak_params(&Gate4::identity()), [0.0; 15]);
    }

    #[test]
    fn random_su4_targets_reached_by_direct_optimization() {
        // Haar-ish target from QR of a random complex matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::from_fn(4, 4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let (q, _) = crate::tensor::qr_matrix(&a);
        let target = to_gate4(&q).unwrap();
        let p = kak_numeric(&target);
        assert!(phase_fidelity(&cartan(&p), &target).powi(2) > 1.0 - 1e-8);
    }
}
