//! Pauli strings, model Hamiltonians and exact reference energies.
//!
//! Site 0 is the most significant bit of a basis-state index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::consts::TOL;
use crate::error::{arg, Error, Result};
use crate::tensor::{eigh_matrix, Matrix, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix {
        let (a, b, c, d) = match self {
            Pauli::I => (ONE, ZERO, ZERO, ONE),
            Pauli::X => (ZERO, ONE, ONE, ZERO),
            Pauli::Y => (ZERO, -I, I, ZERO),
            Pauli::Z => (ONE, ZERO, ZERO, -ONE),
        };
        Matrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Tensor product of a Pauli string, in site order, as a dense matrix.
pub fn string_matrix(letters: &[Pauli]) -> Matrix {
    letters
        .iter()
        .fold(Matrix::identity(1, 1), |acc, p| acc.kronecker(&p.matrix()))
}

/// A weighted Pauli string. Identity letters are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: C64,
    letters: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coeff: C64, letters: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let letters = letters.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        Self { coeff, letters }
    }

    pub fn real(coeff: f64, letters: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        Self::new(C64::from(coeff), letters)
    }

    pub fn letters(&self) -> &BTreeMap<usize, Pauli> {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters.get(&site).copied().unwrap_or(Pauli::I)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters.keys().copied()
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    /// Two Pauli strings commute iff they differ (both non-identity) on an
    /// even number of sites.
    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let clashes = self
            .letters
            .iter()
            .filter(|(s, p)| other.letters.get(s).is_some_and(|q| q != *p))
            .count();
        clashes % 2 == 0
    }

    /// Bit masks for an `n`-site register: `(flip, phase, n_y)`.
    fn masks(&self, n: usize) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (&s, &p) in &self.letters {
            let bit = 1usize << (n - 1 - s);
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
                Pauli::I => {}
            }
        }
        (x, z, ny)
    }
}

/// A sum of Pauli strings on `n_sites` sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSum {
    n_sites: usize,
    terms: Vec<PauliTerm>,
}

impl OperatorSum {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut op = Self::new(n_sites);
        for t in terms {
            op.push(t)?;
        }
        op.canonicalize();
        Ok(op)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if let Some(&s) = term.letters.keys().next_back() {
            if s >= self.n_sites {
                return arg(format!("site {s} outside a {}-site system", self.n_sites));
            }
        }
        self.terms.push(term);
        Ok(())
    }

    /// Merges terms with equal letters and drops negligible coefficients.
    pub fn canonicalize(&mut self) {
        let mut merged: BTreeMap<Vec<(usize, Pauli)>, C64> = BTreeMap::new();
        let mut order = Vec::new();
        for t in self.terms.drain(..) {
            let key: Vec<_> = t.letters.iter().map(|(&s, &p)| (s, p)).collect();
            if !merged.contains_key(&key) {
                order.push(key.clone());
            }
            *merged.entry(key).or_insert(ZERO) += t.coeff;
        }
        for key in order {
            let c = merged[&key];
            if c.norm() > TOL.coefficient {
                self.terms.push(PauliTerm::new(c, key));
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff.conj(),
                    letters: t.letters.clone(),
                })
                .collect(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        let mut a = self.clone();
        a.canonicalize();
        let mut b = self.adjoint();
        b.canonicalize();
        a.terms.len() == b.terms.len()
            && a.terms.iter().zip(&b.terms).all(|(x, y)| {
                x.letters == y.letters && (x.coeff - y.coeff).norm() <= TOL.coefficient
            })
    }

    /// Largest system [`Self::to_dense`] will build; 2^12 x 2^12 complex
    /// entries already take 256 MiB.
    pub const DENSE_LIMIT: usize = 12;

    pub fn to_dense(&self) -> Result<Matrix> {
        if self.n_sites > Self::DENSE_LIMIT {
            return Err(Error::Size(format!(
                "dense form of {} sites exceeds the {}-site limit; use ground_energy or apply_to_state",
                self.n_sites,
                Self::DENSE_LIMIT
            )));
        }
        let dim = 1usize << self.n_sites;
        let mut m = Matrix::zeros(dim, dim);
        for t in &self.terms {
            let (x, z, ny) = t.masks(self.n_sites);
            let ph = t.coeff * I.powu(ny);
            for b in 0..dim {
                let s = if (b & z).count_ones() % 2 == 0 { ph } else { -ph };
                m[(b ^ x, b)] += s;
            }
        }
        Ok(m)
    }

    pub fn apply_to_state(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![ZERO; psi.len()];
        self.apply_into(psi, &mut out)?;
        Ok(out)
    }

    /// `out = H psi`, reusing `out`.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64]) -> Result<()> {
        let dim = 1usize << self.n_sites;
        if psi.len() != dim || out.len() != dim {
            return Err(Error::Dimension(format!(
                "state of length {} for a {}-site operator",
                psi.len(),
                self.n_sites
            )));
        }
        out.iter_mut().for_each(|v| *v = ZERO);
        for t in &self.terms {
            let (x, z, ny) = t.masks(self.n_sites);
            let ph = t.coeff * I.powu(ny);
            for (b, &a) in psi.iter().enumerate() {
                let s = if (b & z).count_ones() % 2 == 0 { ph } else { -ph };
                out[b ^ x] += s * a;
            }
        }
        Ok(())
    }

    pub fn expectation(&self, psi: &[C64]) -> Result<f64> {
        let h = self.apply_to_state(psi)?;
        Ok(psi.iter().zip(&h).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// Sum of squared coefficient magnitudes.
    pub fn coeff_norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm_sqr()).sum()
    }
}

fn ring_bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut b: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic {
        b.push((n - 1, 0));
    }
    b
}

fn ising_from_bonds(n: usize, bonds: &[(usize, usize)], j: f64, h: f64) -> Result<OperatorSum> {
    let mut op = OperatorSum::new(n);
    for &(a, b) in bonds {
        op.push(PauliTerm::real(-j, [(a.min(b), Pauli::X), (a.max(b), Pauli::X)]))?;
    }
    for s in 0..n {
        op.push(PauliTerm::real(h, [(s, Pauli::Z)]))?;
    }
    op.canonicalize();
    Ok(op)
}

/// Transverse-field Ising chain `-j sum X_i X_{i+1} + h sum Z_i`.
pub fn ising_1d(n: usize, j: f64, h: f64, periodic: bool) -> Result<OperatorSum> {
    if n < 2 {
        return arg("ising_1d needs at least 2 sites");
    }
    ising_from_bonds(n, &ring_bonds(n, periodic), j, h)
}

/// Transverse-field Ising model on an `lx` x `ly` lattice, site `r * lx + c`.
pub fn ising_2d(lx: usize, ly: usize, j: f64, h: f64, periodic: bool) -> Result<OperatorSum> {
    if lx < 2 || ly < 2 {
        return arg("ising_2d needs both sides of length at least 2");
    }
    let site = |r: usize, c: usize| r * lx + c;
    let mut bonds = Vec::new();
    for r in 0..ly {
        for (a, b) in ring_bonds(lx, periodic) {
            bonds.push((site(r, a), site(r, b)));
        }
    }
    for c in 0..lx {
        for (a, b) in ring_bonds(ly, periodic) {
            bonds.push((site(a, c), site(b, c)));
        }
    }
    ising_from_bonds(lx * ly, &bonds, j, h)
}

/// Toric code on a periodic `lx` x `ly` lattice with one spin per vertex.
///
/// Every unit square with top-left corner `(r, c)` is a plaquette; even
/// `(r + c)` carries `XXXX`, odd carries `ZZZZ`, both with coefficient +1.
pub fn toric_code(lx: usize, ly: usize) -> Result<OperatorSum> {
    if lx < 2 || ly < 2 || lx % 2 == 1 || ly % 2 == 1 {
        return arg("toric_code needs even side lengths of at least 2");
    }
    let site = |r: usize, c: usize| (r % ly) * lx + (c % lx);
    let mut op = OperatorSum::new(lx * ly);
    for r in 0..ly {
        for c in 0..lx {
            let p = if (r + c) % 2 == 0 { Pauli::X } else { Pauli::Z };
            let corners = [site(r, c), site(r, c + 1), site(r + 1, c), site(r + 1, c + 1)];
            op.push(PauliTerm::real(1.0, corners.map(|s| (s, p))))?;
        }
    }
    op.canonicalize();
    Ok(op)
}

/// Exact ground energy: dense diagonalization up to 10 sites, Lanczos above.
pub fn ground_energy(op: &OperatorSum) -> Result<f64> {
    if op.n_sites() <= 10 {
        let e = eigh_matrix(&op.to_dense()?)?;
        return Ok(e.values[0]);
    }
    lanczos_ground_energy(op, 0x5eed)
}

/// Lowest eigenvalue by matrix-free Lanczos without reorthogonalization.
///
/// Ghost copies can appear in the Ritz spectrum but do not move the lowest
/// Ritz value, which is all this returns.
pub fn lanczos_ground_energy(op: &OperatorSum, seed: u64) -> Result<f64> {
    if op.n_sites() > 24 {
        return Err(Error::Size(format!("{} sites is too large for a state vector", op.n_sites())));
    }
    let dim = 1usize << op.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= nrm);
    let mut prev = vec![ZERO; dim];
    let mut w = vec![ZERO; dim];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::INFINITY;
    let max_steps = 400.min(dim);
    for k in 0..max_steps {
        op.apply_into(&v, &mut w)?;
        let a = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        alpha.push(a);
        let b_prev = if k > 0 { beta[k - 1] } else { 0.0 };
        for i in 0..dim {
            w[i] -= v[i] * a + prev[i] * b_prev;
        }
        let b = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ritz = lowest_tridiagonal(&alpha, &beta);
        if (ritz - last).abs() < 1e-13 || b < 1e-12 {
            return Ok(ritz);
        }
        last = ritz;
        beta.push(b);
        std::mem::swap(&mut prev, &mut v);
        for i in 0..dim {
            v[i] = w[i] / b;
        }
    }
    Ok(last)
}

fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut t = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = alpha[i];
        if i + 1 < n {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t.symmetric_eigenvalues().min()
}

/// Dense lowest eigenpair of a small operator.
pub fn ground_state(op: &OperatorSum) -> Result<(f64, DVector<C64>)> {
    let e = eigh_matrix(&op.to_dense()?)?;
    Ok((e.values[0], e.vectors.column(0).into_owned()))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl fmt::Display for OperatorSum {
    /// One term per line: `coeff site:letter ...`, coefficient written as
    /// `re` or `(re,im)`. The first line is `sites <n>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sites {}", self.n_sites)?;
        for t in &self.terms {
            if t.coeff.im == 0.0 {
                write!(f, "{}", fmt_f64(t.coeff.re))?;
            } else {
                write!(f, "({},{})", fmt_f64(t.coeff.re), fmt_f64(t.coeff.im))?;
            }
            for (s, p) in &t.letters {
                write!(f, " {s}:{}", p.as_char())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for OperatorSum {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, head) = lines.next().ok_or_else(|| perr(1, "missing `sites` header"))?;
        let n: usize = head
            .strip_prefix("sites")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| perr(ln, "expected `sites <n>`"))?;
        let mut op = OperatorSum::new(n);
        for (ln, line) in lines {
            let mut parts = line.split_whitespace();
            let c = parts.next().ok_or_else(|| perr(ln, "empty term"))?;
            let coeff = if let Some(inner) = c.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
                let (re, im) = inner.split_once(',').ok_or_else(|| perr(ln, "bad complex"))?;
                C64::new(
                    re.trim().parse().map_err(|_| perr(ln, "bad real part"))?,
                    im.trim().parse().map_err(|_| perr(ln, "bad imaginary part"))?,
                )
            } else {
                C64::from(c.parse::<f64>().map_err(|_| perr(ln, "bad coefficient"))?)
            };
            let mut letters = Vec::new();
            for tok in parts {
                let (s, p) = tok.split_once(':').ok_or_else(|| perr(ln, "expected site:letter"))?;
                let s: usize = s.parse().map_err(|_| perr(ln, "bad site index"))?;
                let mut chars = p.chars();
                let p = match (chars.next().and_then(Pauli::from_char), chars.next()) {
                    (Some(p), None) => p,
                    _ => return Err(perr(ln, "bad Pauli letter")),
                };
                letters.push((s, p));
            }
            op.push(PauliTerm::new(coeff, letters))
                .map_err(|e| perr(ln, &e.to_string()))?;
        }
        Ok(op)
    }
}
