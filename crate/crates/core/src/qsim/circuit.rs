//! Layered circuits of generic two-qubit gates on a dense statevector.
//!
//! Qubit 0 is the most significant bit of a basis index.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gates::{cartan, cartan_with_derivatives, Gate4, PARAMS_PER_GATE};
use crate::error::{arg, Error, Result};
use crate::pauli::OperatorSum;
use crate::tensor::{Matrix, C64, ONE, ZERO};

/// Largest register simulated densely.
pub const MAX_QUBITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Ladder,
    BrickWall,
    Custom,
}

impl Topology {
    fn name(self) -> &'static str {
        match self {
            Topology::Ladder => "ladder",
            Topology::BrickWall => "brick-wall",
            Topology::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub qubits: (usize, usize),
    /// Joins the first and last qubit of the register.
    pub wrap: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    topology: Topology,
    gates: Vec<GateSpec>,
    layer_sizes: Vec<usize>,
}

/// Anything that can act linearly on a statevector.
pub trait Observable {
    fn n_qubits(&self) -> usize;
    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>>;
}

impl Observable for OperatorSum {
    fn n_qubits(&self) -> usize {
        self.n_sites()
    }

    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.apply_to_state(psi)
    }
}

/// One product of matrices on contiguous qubit blocks.
#[derive(Clone, Debug)]
pub struct BlockTerm {
    pub coeff: C64,
    /// `(first qubit, matrix)`; the block width is `log2` of the matrix size.
    pub factors: Vec<(usize, Matrix)>,
}

/// Sum of products of block-local matrices.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub n_qubits: usize,
    pub terms: Vec<BlockTerm>,
}

impl Observable for BlockOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let n = self.n_qubits;
        check_len(psi, n)?;
        let mut out = vec![ZERO; psi.len()];
        let mut tmp = vec![ZERO; psi.len()];
        for term in &self.terms {
            let Some(((last_start, last), rest)) = term.factors.split_last() else {
                out.iter_mut().zip(psi).for_each(|(o, x)| *o += term.coeff * x);
                continue;
            };
            let src: &[C64] = if rest.is_empty() {
                psi
            } else {
                tmp.copy_from_slice(psi);
                for (start, m) in rest {
                    apply_block_in_place(&mut tmp, n, *start, m)?;
                }
                &tmp
            };
            accumulate_block(&mut out, src, n, *last_start, &(last * term.coeff))?;
        }
        Ok(out)
    }
}

fn block_width(n: usize, start: usize, m: &Matrix) -> Result<usize> {
    let d = m.nrows();
    if d != m.ncols() || !d.is_power_of_two() {
        return arg("block matrix must be square with power-of-two size");
    }
    let w = d.trailing_zeros() as usize;
    if start + w > n {
        return arg(format!("block {start}..{} exceeds {n} qubits", start + w));
    }
    Ok(w)
}

fn apply_block_in_place(psi: &mut [C64], n: usize, start: usize, m: &Matrix) -> Result<()> {
    if block_width(n, start, m)? == 2 {
        check_len(psi, n)?;
        apply_gate(psi, n, start, start + 1, &Gate4::from_fn(|r, c| m[(r, c)]));
    } else {
        let v = apply_block(psi, n, start, m)?;
        psi.copy_from_slice(&v);
    }
    Ok(())
}

/// `out += m psi` with `m` on qubits `start..`.
fn accumulate_block(out: &mut [C64], psi: &[C64], n: usize, start: usize, m: &Matrix) -> Result<()> {
    if block_width(n, start, m)? == 2 {
        check_len(psi, n)?;
        check_len(out, n)?;
        let u: [[C64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]));
        let lay = QuadLayout::new(n, start, start + 1);
        for base in lay.bases() {
            let [o0, o1, o2, o3] = lay.split(out, base);
            let [s0, s1, s2, s3] = lay.split_ref(psi, base);
            let os = o0.iter_mut().zip(o1).zip(o2).zip(o3);
            let ss = s0.iter().zip(s1).zip(s2).zip(s3);
            for ((((a, b), c), d), (((w, x), y), z)) in os.zip(ss) {
                let v = mul4(&u, &[*w, *x, *y, *z]);
                *a += v[0];
                *b += v[1];
                *c += v[2];
                *d += v[3];
            }
        }
    } else {
        let v = apply_block(psi, n, start, m)?;
        out.iter_mut().zip(&v).for_each(|(o, x)| *o += x);
    }
    Ok(())
}

fn check_len(psi: &[C64], n: usize) -> Result<()> {
    if psi.len() != 1 << n {
        return Err(Error::Dimension(format!(
            "state of length {} on {n} qubits",
            psi.len()
        )));
    }
    Ok(())
}

/// Applies `m` to qubits `start..start + w` where `m` is `2^w x 2^w`.
pub fn apply_block(psi: &[C64], n: usize, start: usize, m: &Matrix) -> Result<Vec<C64>> {
    let d = m.nrows();
    let w = block_width(n, start, m)?;
    check_len(psi, n)?;
    let inner = 1 << (n - start - w);
    let outer = 1 << start;
    let mut out = vec![ZERO; psi.len()];
    for a in 0..outer {
        let base = a * d * inner;
        for i in 0..d {
            let row = &mut out[base + i * inner..base + (i + 1) * inner];
            for j in 0..d {
                let mij = m[(i, j)];
                if mij == ZERO {
                    continue;
                }
                let src = &psi[base + j * inner..base + (j + 1) * inner];
                row.iter_mut().zip(src).for_each(|(o, s)| *o += mij * s);
            }
        }
    }
    Ok(out)
}

/// Index layout of a two-qubit gate on `(q1, q2)`: the state splits into
/// runs of `slo` consecutive amplitudes, four runs per block, one for each
/// local basis state with `q1` as the more significant bit.
struct QuadLayout {
    n: usize,
    slo: usize,
    shi: usize,
    swap: bool,
}

impl QuadLayout {
    fn new(n: usize, q1: usize, q2: usize) -> Self {
        let (p1, p2) = (n - 1 - q1, n - 1 - q2);
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        Self {
            n,
            slo: 1 << lo,
            shi: 1 << hi,
            swap: p1 < p2,
        }
    }

    fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..1usize << self.n)
            .step_by(2 * self.shi)
            .flat_map(|a| (a..a + self.shi).step_by(2 * self.slo))
    }

    fn split<'a>(&self, v: &'a mut [C64], base: usize) -> [&'a mut [C64]; 4] {
        let (left, right) = v[base..].split_at_mut(self.shi);
        let (s0, s1) = left[..2 * self.slo].split_at_mut(self.slo);
        let (s2, s3) = right[..2 * self.slo].split_at_mut(self.slo);
        if self.swap {
            [s0, s2, s1, s3]
        } else {
            [s0, s1, s2, s3]
        }
    }

    fn split_ref<'a>(&self, v: &'a [C64], base: usize) -> [&'a [C64]; 4] {
        let s = &v[base..];
        let r = |o: usize| &s[o..o + self.slo];
        let (s1, s2) = (r(self.slo), r(self.shi));
        if self.swap {
            [r(0), s2, s1, r(self.shi + self.slo)]
        } else {
            [r(0), s1, s2, r(self.shi + self.slo)]
        }
    }
}

#[inline(always)]
fn to_array(u: &Gate4) -> [[C64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| u[(r, c)]))
}

#[inline(always)]
fn mul4(u: &[[C64; 4]; 4], v: &[C64; 4]) -> [C64; 4] {
    std::array::from_fn(|r| u[r][0] * v[0] + u[r][1] * v[1] + u[r][2] * v[2] + u[r][3] * v[3])
}

/// In-place application of a two-qubit gate.
pub fn apply_gate(psi: &mut [C64], n: usize, q1: usize, q2: usize, u: &Gate4) {
    assert_eq!(psi.len(), 1 << n, "state length");
    let u = to_array(u);
    let lay = QuadLayout::new(n, q1, q2);
    for base in lay.bases() {
        let [s0, s1, s2, s3] = lay.split(psi, base);
        for (((a, b), c), d) in s0.iter_mut().zip(s1).zip(s2).zip(s3) {
            let v = mul4(&u, &[*a, *b, *c, *d]);
            (*a, *b, *c, *d) = (v[0], v[1], v[2], v[3]);
        }
    }
}

/// One reverse step through a gate: undoes `u` on both `psi` and `lam` and
/// returns `E[a, b] = sum over the rest of conj(lam[a, rest]) psi_before[b, rest]`,
/// with `lam` taken after the gate.
fn reverse_step(psi: &mut [C64], lam: &mut [C64], n: usize, q1: usize, q2: usize, u: &Gate4) -> Gate4 {
    let udag = to_array(&u.adjoint());
    let mut e = [[ZERO; 4]; 4];
    let lay = QuadLayout::new(n, q1, q2);
    for base in lay.bases() {
        let [p0, p1, p2, p3] = lay.split(psi, base);
        let [l0, l1, l2, l3] = lay.split(lam, base);
        let ps = p0.iter_mut().zip(p1).zip(p2).zip(p3);
        let ls = l0.iter_mut().zip(l1).zip(l2).zip(l3);
        for ((((a, b), c), d), (((w, x), y), z)) in ps.zip(ls) {
            let p = mul4(&udag, &[*a, *b, *c, *d]);
            let l = [*w, *x, *y, *z];
            for (r, lr) in l.iter().enumerate() {
                let lc = lr.conj();
                for (col, pc) in p.iter().enumerate() {
                    e[r][col] += lc * pc;
                }
            }
            let l = mul4(&udag, &l);
            (*a, *b, *c, *d) = (p[0], p[1], p[2], p[3]);
            (*w, *x, *y, *z) = (l[0], l[1], l[2], l[3]);
        }
    }
    Gate4::from_fn(|a, b| e[a][b])
}

/// Loss closure result: value and `dL/d(conj psi)`.
pub type LossGrad = (f64, Vec<C64>);

/// `-|<target|psi>|^2` with its gradient.
pub fn overlap_loss(target: &[C64]) -> impl Fn(&[C64]) -> LossGrad + '_ {
    move |psi| {
        let ov: C64 = target.iter().zip(psi).map(|(t, p)| t.conj() * p).sum();
        (-ov.norm_sqr(), target.iter().map(|t| -t * ov).collect())
    }
}

pub fn zero_state(n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; 1 << n];
    v[0] = ONE;
    v
}

pub fn expect(psi: &[C64], op: &dyn Observable) -> Result<f64> {
    let o = op.apply(psi)?;
    Ok(psi.iter().zip(&o).map(|(a, b)| a.conj() * b).sum::<C64>().re)
}

pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

impl Circuit {
    pub fn empty(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size(format!("{n_qubits} qubits, limit {MAX_QUBITS}")));
        }
        Ok(Self {
            n_qubits,
            topology: Topology::Custom,
            gates: Vec::new(),
            layer_sizes: Vec::new(),
        })
    }

    /// Gates `(0,1), (1,2), ..., (n-2,n-1)` per layer.
    pub fn ladder(n_qubits: usize, layers: usize) -> Result<Self> {
        let mut c = Self::empty(n_qubits)?;
        c.topology = Topology::Ladder;
        for _ in 0..layers {
            c.push_layer(ladder_pairs(n_qubits))?;
        }
        Ok(c)
    }

    /// Even pairs then odd pairs per layer.
    pub fn brick_wall(n_qubits: usize, layers: usize) -> Result<Self> {
        let mut c = Self::empty(n_qubits)?;
        c.topology = Topology::BrickWall;
        for _ in 0..layers {
            c.push_layer(brick_pairs(n_qubits))?;
        }
        Ok(c)
    }

    pub fn custom(n_qubits: usize, layers: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let mut c = Self::empty(n_qubits)?;
        for l in layers {
            c.push_layer(l)?;
        }
        Ok(c)
    }

    fn push_layer(&mut self, pairs: Vec<(usize, usize)>) -> Result<()> {
        for &(a, b) in &pairs {
            if a == b || a >= self.n_qubits || b >= self.n_qubits {
                return arg(format!("gate on ({a}, {b}) in a {}-qubit circuit", self.n_qubits));
            }
        }
        self.layer_sizes.push(pairs.len());
        self.gates.extend(pairs.into_iter().map(|qubits| GateSpec { qubits, wrap: false }));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn n_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn n_params(&self) -> usize {
        self.gates.len() * PARAMS_PER_GATE
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn has_wrap_gates(&self) -> bool {
        self.gates.iter().any(|g| g.wrap)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return arg(format!(
                "{} gates need {} parameters, got {}",
                self.gates.len(),
                self.n_params(),
                params.len()
            ));
        }
        Ok(())
    }

    pub fn matrices(&self, params: &[f64]) -> Result<Vec<Gate4>> {
        self.check_params(params)?;
        Ok(params.chunks(PARAMS_PER_GATE).map(cartan).collect())
    }

    /// Applies the circuit to `psi` in place.
    pub fn apply(&self, params: &[f64], psi: &mut [C64]) -> Result<()> {
        check_len(psi, self.n_qubits)?;
        for (g, u) in self.gates.iter().zip(self.matrices(params)?) {
            apply_gate(psi, self.n_qubits, g.qubits.0, g.qubits.1, &u);
        }
        Ok(())
    }

    /// Applies the inverse circuit to `psi` in place.
    pub fn apply_adjoint(&self, params: &[f64], psi: &mut [C64]) -> Result<()> {
        check_len(psi, self.n_qubits)?;
        let mats = self.matrices(params)?;
        for (g, u) in self.gates.iter().zip(&mats).rev() {
            apply_gate(psi, self.n_qubits, g.qubits.0, g.qubits.1, &u.adjoint());
        }
        Ok(())
    }

    /// The circuit state on `|0...0>`.
    pub fn simulate(&self, params: &[f64]) -> Result<Vec<C64>> {
        let mut psi = zero_state(self.n_qubits);
        self.apply(params, &mut psi)?;
        Ok(psi)
    }

    /// Loss and parameter gradient by reverse accumulation. `loss` returns the
    /// value and `dL/d(conj psi)` at the final state.
    pub fn value_and_gradient(
        &self,
        params: &[f64],
        loss: &mut dyn FnMut(&[C64]) -> Result<LossGrad>,
    ) -> Result<(f64, Vec<f64>)> {
        let n = self.n_qubits;
        let mats = self.matrices(params)?;
        let mut psi = zero_state(n);
        for (g, u) in self.gates.iter().zip(&mats) {
            apply_gate(&mut psi, n, g.qubits.0, g.qubits.1, u);
        }
        let (value, mut lam) = loss(&psi)?;
        check_len(&lam, n)?;
        let mut grad = vec![0.0; params.len()];
        for (k, g) in self.gates.iter().enumerate().rev() {
            let (q1, q2) = g.qubits;
            let e = reverse_step(&mut psi, &mut lam, n, q1, q2, &mats[k]);
            let (_, d) = cartan_with_derivatives(&params[k * PARAMS_PER_GATE..(k + 1) * PARAMS_PER_GATE]);
            for (p, dk) in d.iter().enumerate() {
                grad[k * PARAMS_PER_GATE + p] = 2.0 * e.component_mul(dk).sum().re;
            }
        }
        Ok((value, grad))
    }

    /// Gradient of `<psi(theta)|O|psi(theta)>`.
    pub fn gradient(&self, params: &[f64], op: &dyn Observable) -> Result<(f64, Vec<f64>)> {
        self.value_and_gradient(params, &mut |psi| {
            let o = op.apply(psi)?;
            let v = psi.iter().zip(&o).map(|(a, b)| a.conj() * b).sum::<C64>().re;
            Ok((v, o))
        })
    }

    fn layer_template(&self) -> Vec<(usize, usize)> {
        match self.topology {
            Topology::Ladder => ladder_pairs(self.n_qubits),
            Topology::BrickWall => brick_pairs(self.n_qubits),
            Topology::Custom => {
                let size = self.layer_sizes.last().copied().unwrap_or(0);
                let start = self.gates.len() - size;
                self.gates[start..]
                    .iter()
                    .filter(|g| !g.wrap)
                    .map(|g| g.qubits)
                    .collect()
            }
        }
    }

    /// Appends `e` layers of the circuit's own topology with parameters drawn
    /// from `N(0, sigma^2)`. Wrapped circuits get wrapped new layers.
    pub fn extend_layers(&self, params: &[f64], e: usize, sigma: f64, seed: u64) -> Result<(Circuit, Vec<f64>)> {
        self.check_params(params)?;
        if !(sigma >= 0.0) {
            return arg("sigma must be nonnegative");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Argument(e.to_string()))?;
        let template = self.layer_template();
        let wrap = self.has_wrap_gates();
        let mut c = self.clone();
        let mut p = params.to_vec();
        for _ in 0..e {
            c.push_layer(template.clone())?;
            if wrap {
                c.append_wrap_to_last_layer();
            }
        }
        p.extend((params.len()..c.n_params()).map(|_| normal.sample(&mut rng)));
        Ok((c, p))
    }

    fn append_wrap_to_last_layer(&mut self) {
        let n = self.n_qubits;
        *self.layer_sizes.last_mut().expect("layer") += 1;
        self.gates.push(GateSpec { qubits: (0, n - 1), wrap: true });
    }

    /// Appends to every layer one identity gate joining the first and last qubit.
    pub fn add_wrap_gates(&self, params: &[f64]) -> Result<(Circuit, Vec<f64>)> {
        self.check_params(params)?;
        if self.n_qubits < 3 {
            return arg("wrap gates need at least three qubits");
        }
        let mut c = Circuit { gates: Vec::new(), layer_sizes: Vec::new(), ..self.clone() };
        let mut p = Vec::new();
        let mut at = 0;
        for &size in &self.layer_sizes {
            c.gates.extend_from_slice(&self.gates[at..at + size]);
            p.extend_from_slice(&params[at * PARAMS_PER_GATE..(at + size) * PARAMS_PER_GATE]);
            c.gates.push(GateSpec { qubits: (0, self.n_qubits - 1), wrap: true });
            p.extend([0.0; PARAMS_PER_GATE]);
            c.layer_sizes.push(size + 1);
            at += size;
        }
        Ok((c, p))
    }

    /// Gates and parameters of layer `l` alone.
    pub fn layer(&self, l: usize, params: &[f64]) -> Result<(Circuit, Vec<f64>)> {
        self.check_params(params)?;
        if l >= self.n_layers() {
            return arg(format!("layer {l} of {}", self.n_layers()));
        }
        let start: usize = self.layer_sizes[..l].iter().sum();
        let size = self.layer_sizes[l];
        let c = Circuit {
            gates: self.gates[start..start + size].to_vec(),
            layer_sizes: vec![size],
            ..self.clone()
        };
        Ok((c, params[start * PARAMS_PER_GATE..(start + size) * PARAMS_PER_GATE].to_vec()))
    }

    /// Concatenates the layers of `other` after those of `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return arg("qubit counts differ");
        }
        if self.gates.is_empty() {
            self.topology = other.topology;
        } else if self.topology != other.topology {
            self.topology = Topology::Custom;
        }
        self.gates.extend_from_slice(&other.gates);
        self.layer_sizes.extend_from_slice(&other.layer_sizes);
        Ok(())
    }

    /// Text listing with parameters, exact under round trip.
    pub fn to_text(&self, params: &[f64]) -> Result<String> {
        self.check_params(params)?;
        let mut s = String::new();
        writeln!(s, "qubits {}", self.n_qubits).unwrap();
        writeln!(s, "topology {}", self.topology.name()).unwrap();
        let mut k = 0;
        for &size in &self.layer_sizes {
            s.push_str("layer\n");
            for g in &self.gates[k..k + size] {
                s.push_str(if g.wrap { "wrap" } else { "gate" });
                write!(s, " {} {}", g.qubits.0, g.qubits.1).unwrap();
                for p in &params[k * PARAMS_PER_GATE..(k + 1) * PARAMS_PER_GATE] {
                    write!(s, " {p:?}").unwrap();
                }
                s.push('\n');
                k += 1;
            }
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<(Circuit, Vec<f64>)> {
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.into() };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (i, l) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
        let n: usize = l
            .strip_prefix("qubits ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| perr(i, "expected `qubits <n>`"))?;
        let (i, l) = lines.next().ok_or_else(|| perr(i, "missing topology"))?;
        let topology = match l.strip_prefix("topology ").map(str::trim) {
            Some("ladder") => Topology::Ladder,
            Some("brick-wall") => Topology::BrickWall,
            Some("custom") => Topology::Custom,
            _ => return Err(perr(i, "expected `topology ladder|brick-wall|custom`")),
        };
        let mut c = Circuit::empty(n)?;
        c.topology = topology;
        let mut params = Vec::new();
        for (i, l) in lines {
            if l == "layer" {
                c.layer_sizes.push(0);
                continue;
            }
            let mut tok = l.split_whitespace();
            let wrap = match tok.next() {
                Some("gate") => false,
                Some("wrap") => true,
                _ => return Err(perr(i, "expected `layer`, `gate` or `wrap`")),
            };
            let size = c.layer_sizes.last_mut().ok_or_else(|| perr(i, "gate before first layer"))?;
            let nums: Vec<&str> = tok.collect();
            if nums.len() != 2 + PARAMS_PER_GATE {
                return Err(perr(i, "a gate needs two qubits and 15 parameters"));
            }
            let q: Vec<usize> = nums[..2]
                .iter()
                .map(|t| t.parse().map_err(|_| perr(i, "bad qubit index")))
                .collect::<Result<_>>()?;
            if q[0] == q[1] || q[0] >= n || q[1] >= n {
                return Err(perr(i, "qubit index out of range"));
            }
            for t in &nums[2..] {
                params.push(t.parse::<f64>().map_err(|_| perr(i, "bad parameter"))?);
            }
            c.gates.push(GateSpec { qubits: (q[0], q[1]), wrap });
            *size += 1;
        }
        Ok((c, params))
    }
}

fn ladder_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n - 1).map(|q| (q, q + 1)).collect()
}

fn brick_pairs(n: usize) -> Vec<(usize, usize)> {
    let even = (0..n - 1).step_by(2).map(|q| (q, q + 1));
    let odd = (1..n - 1).step_by(2).map(|q| (q, q + 1));
    even.chain(odd).collect()
}
