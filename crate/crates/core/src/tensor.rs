//! Dense complex tensors and the matrix factorizations built on them.
//!
//! Storage is row-major: the last leg varies fastest. Every factorization
//! goes through a matricization (`rows | cols`) handled by nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A dense complex tensor with optional leg labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.iter().any(|&d| d == 0) {
            return arg(format!("zero-sized leg in shape {shape:?}"));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {n} amplitudes, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape,
            data,
            labels: None,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![ZERO; n],
            labels: None,
        }
    }

    pub fn scalar(v: C64) -> Self {
        Self {
            shape: vec![],
            data: vec![v],
            labels: None,
        }
    }

    /// Builds a tensor by evaluating `f` on every multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self {
            shape: shape.to_vec(),
            data,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.shape.len() {
            return arg("one label per leg required");
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return arg("leg labels must be unique");
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    fn strides(shape: &[usize]) -> Vec<usize> {
        let mut s = vec![1usize; shape.len()];
        for k in (0..shape.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * shape[k + 1];
        }
        s
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        let st = Self::strides(&self.shape);
        self.data[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn conj(&self) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    /// Hermitian inner product `<self|other>` over all amplitudes.
    pub fn inner(&self, other: &Tensor) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn sub_norm(&self, other: &Tensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Dimension(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
            labels: None,
        })
    }

    /// Reorders legs so that new leg `k` is old leg `axes[k]`.
    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if axes.len() != r || axes.iter().any(|&a| a >= r || std::mem::replace(&mut seen[a], true)) {
            return arg(format!("invalid permutation {axes:?} for rank {r}"));
        }
        if axes.iter().enumerate().all(|(k, &a)| k == a) {
            return Ok(self.clone());
        }
        let old_st = Self::strides(&self.shape);
        let new_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let st: Vec<usize> = axes.iter().map(|&a| old_st[a]).collect();
        let n = self.data.len();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; r];
        let mut off = 0usize;
        for _ in 0..n {
            data.push(self.data[off]);
            for k in (0..r).rev() {
                idx[k] += 1;
                off += st[k];
                if idx[k] < new_shape[k] {
                    break;
                }
                off -= st[k] * new_shape[k];
                idx[k] = 0;
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| axes.iter().map(|&a| l[a].clone()).collect());
        Ok(Self {
            shape: new_shape,
            data,
            labels,
        })
    }

    /// Matricizes with `row_legs` (in the given order) as rows and the
    /// remaining legs (in original order) as columns.
    pub fn matricize(&self, row_legs: &[usize]) -> Result<(Matrix, Vec<usize>, Vec<usize>)> {
        let col_legs: Vec<usize> = (0..self.rank()).filter(|k| !row_legs.contains(k)).collect();
        let mut axes = row_legs.to_vec();
        axes.extend(&col_legs);
        let p = self.permute(&axes)?;
        let rows: Vec<usize> = row_legs.iter().map(|&k| self.shape[k]).collect();
        let cols: Vec<usize> = col_legs.iter().map(|&k| self.shape[k]).collect();
        let nr: usize = rows.iter().product();
        let nc: usize = cols.iter().product();
        Ok((DMatrix::from_row_slice(nr, nc, &p.data), rows, cols))
    }

    pub fn from_matrix(m: &Matrix, shape: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)]);
            }
        }
        Self::new(shape.to_vec(), data)
    }

    /// Applies `m` to leg `leg`: `t'[.., i, ..] = sum_j m[i, j] t[.., j, ..]`.
    pub fn apply_leg(&self, leg: usize, m: &Matrix) -> Result<Self> {
        let d = self.shape[leg];
        if m.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix with {} columns applied to leg of dim {d}",
                m.ncols()
            )));
        }
        let outer: usize = self.shape[..leg].iter().product();
        let inner: usize = self.shape[leg + 1..].iter().product();
        let nd = m.nrows();
        let mut data = vec![ZERO; outer * nd * inner];
        for o in 0..outer {
            for i in 0..nd {
                let dst = &mut data[(o * nd + i) * inner..(o * nd + i + 1) * inner];
                for j in 0..d {
                    let c = m[(i, j)];
                    if c == ZERO {
                        continue;
                    }
                    let src = &self.data[(o * d + j) * inner..(o * d + j + 1) * inner];
                    for (x, y) in dst.iter_mut().zip(src) {
                        *x += c * y;
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape[leg] = nd;
        Ok(Self {
            shape,
            data,
            labels: self.labels.clone(),
        })
    }
}

/// Contracts `a` and `b` over the listed `(leg_of_a, leg_of_b)` pairs.
///
/// Result legs: free legs of `a` then free legs of `b`, each in original order.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    for &(la, lb) in pairs {
        if la >= a.rank() || lb >= b.rank() {
            return arg(format!("leg pair ({la}, {lb}) out of range"));
        }
        if a.shape[la] != b.shape[lb] {
            return Err(Error::Contraction {
                a_leg: la,
                b_leg: lb,
                a_dim: a.shape[la],
                b_dim: b.shape[lb],
            });
        }
    }
    let a_c: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let b_c: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let a_free: Vec<usize> = (0..a.rank()).filter(|k| !a_c.contains(k)).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|k| !b_c.contains(k)).collect();
    let (ma, _, _) = a.matricize(&a_free)?;
    let (mb, _, _) = b.matricize(&b_c)?;
    let prod = ma * mb;
    let mut shape: Vec<usize> = a_free.iter().map(|&k| a.shape[k]).collect();
    shape.extend(b_free.iter().map(|&k| b.shape[k]));
    Tensor::from_matrix(&prod, &shape)
}

/// Result of a QR split: `q` carries `kept_legs` plus a trailing new link,
/// `r` carries the new link followed by the complement legs.
#[derive(Clone, Debug)]
pub struct QrSplit {
    pub q: Tensor,
    pub r: Tensor,
}

fn check_split(t: &Tensor, kept: &[usize]) -> Result<()> {
    if kept.is_empty() || kept.len() >= t.rank() {
        return arg("kept legs must be a nonempty strict subset");
    }
    if kept.iter().any(|&k| k >= t.rank()) {
        return arg("kept leg out of range");
    }
    let mut s = kept.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != kept.len() {
        return arg("duplicate kept leg");
    }
    Ok(())
}

/// QR of a matrix with the diagonal of `r` made real and nonnegative.
pub fn qr_matrix(m: &Matrix) -> (Matrix, Matrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows().min(r.ncols()) {
        let d = r[(k, k)];
        let a = d.norm();
        if a > 0.0 {
            let ph = d / a;
            r.row_mut(k).iter_mut().for_each(|z| *z *= ph.conj());
            q.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
    }
    (q, r)
}

pub fn qr_split(t: &Tensor, kept_legs: &[usize]) -> Result<QrSplit> {
    check_split(t, kept_legs)?;
    let (m, rows, cols) = t.matricize(kept_legs)?;
    let (q, r) = qr_matrix(&m);
    let k = q.ncols();
    let mut qs = rows;
    qs.push(k);
    let mut rs = vec![k];
    rs.extend(cols);
    Ok(QrSplit {
        q: Tensor::from_matrix(&q, &qs)?,
        r: Tensor::from_matrix(&r, &rs)?,
    })
}

/// Hermitian eigendecomposition with ascending eigenvalues; columns of
/// `vectors` are the eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

pub fn eigh_matrix(m: &Matrix) -> Result<Eigh> {
    if m.nrows() != m.ncols() {
        return arg(format!("eigh needs a square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let e = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vectors.set_column(c, &e.eigenvectors.column(k));
    }
    Ok(Eigh { values, vectors })
}

/// Eigendecomposition of a rank-2 tensor viewed as a matrix.
pub fn eigh(m: &Tensor) -> Result<Eigh> {
    if m.rank() != 2 {
        return arg("eigh expects a rank-2 tensor");
    }
    let (mat, _, _) = m.matricize(&[0])?;
    eigh_matrix(&mat)
}

/// Result of an SVD split: `u` (kept legs + link), descending `s`, `v` whose
/// conjugate transpose completes the factorization (`v` has the complement
/// legs followed by the link).
#[derive(Clone, Debug)]
pub struct SvdSplit {
    pub u: Tensor,
    pub s: Vec<f64>,
    pub v: Tensor,
}

/// Thin SVD of a matrix with descending singular values: `m = u diag(s) vt`.
pub fn svd_matrix(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u2 = Matrix::zeros(u.nrows(), k);
    let mut vt2 = Matrix::zeros(k, vt.ncols());
    let mut s = Vec::with_capacity(k);
    for (c, &j) in order.iter().enumerate() {
        u2.set_column(c, &u.column(j));
        vt2.set_row(c, &vt.row(j));
        s.push(svd.singular_values[j]);
    }
    (u2, s, vt2)
}

pub fn svd_split(t: &Tensor, kept_legs: &[usize]) -> Result<SvdSplit> {
    check_split(t, kept_legs)?;
    let (m, rows, cols) = t.matricize(kept_legs)?;
    let (u, s, vt) = svd_matrix(&m);
    let k = s.len();
    let mut us = rows;
    us.push(k);
    let mut vs = cols;
    vs.push(k);
    let v = vt.adjoint();
    Ok(SvdSplit {
        u: Tensor::from_matrix(&u, &us)?,
        s,
        v: Tensor::from_matrix(&v, &vs)?,
    })
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Frobenius distance of `m† m` from the identity.
pub fn isometry_defect(m: &Matrix) -> f64 {
    let g = m.adjoint() * m;
    (g - Matrix::identity(m.ncols(), m.ncols())).norm()
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && (m - m.adjoint()).norm() <= tol
}
