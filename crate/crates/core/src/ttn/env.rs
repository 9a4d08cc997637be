//! Cached environments of operator terms across tree links.
//!
//! The environment of term `t` on the directed link `u -> v` is the matrix
//! obtained by contracting everything on `u`'s side of the link with its
//! conjugate and the term's factors there. Terms with no support on that side
//! are stored as `None` and act as the side's norm.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::htensor::open_link_contraction;
use crate::tensor::{eigh_matrix, Matrix, Tensor, C64};

use super::local_op::LocalOperator;
use super::network::{Leg, NodeData, TreeNetwork};

#[derive(Clone, Debug)]
pub struct LinkEnv {
    /// Largest node stamp on the source side when computed.
    version: u64,
    /// Norm of the source side; `None` means identity.
    pub gram: Option<Matrix>,
    pub terms: Vec<Option<Matrix>>,
}

/// How environments treat the norm of each subtree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvMode {
    /// Assume isometry toward the center and measure with the network's
    /// meter; grams are never computed.
    Algorithm,
    /// Exact noiseless contraction with explicit grams.
    Diagnostic,
}

#[derive(Clone, Debug)]
pub struct EnvCache {
    op: LocalOperator,
    envs: HashMap<(usize, usize), LinkEnv>,
    pub mode: EnvMode,
    /// Link environments computed so far.
    pub computed: u64,
}

impl EnvCache {
    pub fn new(op: LocalOperator) -> Self {
        Self::with_mode(op, EnvMode::Algorithm)
    }

    pub fn diagnostic(op: LocalOperator) -> Self {
        Self::with_mode(op, EnvMode::Diagnostic)
    }

    pub fn with_mode(op: LocalOperator, mode: EnvMode) -> Self {
        Self {
            op,
            envs: HashMap::new(),
            mode,
            computed: 0,
        }
    }

    pub fn operator(&self) -> &LocalOperator {
        &self.op
    }

    pub fn clear(&mut self) {
        self.envs.clear();
    }

    /// Environment of the link `from -> to`, recomputed only if a node on
    /// `from`'s side changed since it was last built.
    pub fn link_env(&mut self, net: &mut TreeNetwork, from: usize, to: usize) -> Result<&LinkEnv> {
        if net.leg_to(from, to).is_none() {
            return Err(Error::Path { from, to });
        }
        self.ensure(net, from, to)?;
        Ok(&self.envs[&(from, to)])
    }

    fn ensure(&mut self, net: &mut TreeNetwork, from: usize, to: usize) -> Result<u64> {
        let mut version = net.stamp(from);
        for w in net.neighbors(from) {
            if w != to {
                version = version.max(self.ensure(net, w, from)?);
            }
        }
        if self.envs.get(&(from, to)).is_some_and(|e| e.version == version) {
            return Ok(version);
        }
        let env = self.compute(net, from, to, version)?;
        self.envs.insert((from, to), env);
        self.computed += 1;
        Ok(version)
    }

    /// Inputs on each leg of `u` except `skip`: per term, the factor or
    /// environment (`None` where the term is absent), and the gram.
    fn leg_inputs(&self, net: &TreeNetwork, u: usize, skip: Option<usize>) -> (Vec<Vec<Option<Matrix>>>, Vec<Option<Matrix>>) {
        let legs = &net.node(u).legs;
        let nt = self.op.terms.len();
        let mut terms = vec![vec![None; legs.len()]; nt];
        let mut grams = vec![None; legs.len()];
        for (k, leg) in legs.iter().enumerate() {
            if Some(k) == skip {
                continue;
            }
            match *leg {
                Leg::Site(s) => {
                    for (t, row) in terms.iter_mut().enumerate() {
                        row[k] = self.op.factor(t, s).cloned();
                    }
                }
                Leg::Bond(w) => {
                    let e = &self.envs[&(w, u)];
                    for (t, row) in terms.iter_mut().enumerate() {
                        row[k] = e.terms[t].clone();
                    }
                    grams[k] = e.gram.clone();
                }
            }
        }
        (terms, grams)
    }

    fn compute(&self, net: &mut TreeNetwork, u: usize, v: usize, version: u64) -> Result<LinkEnv> {
        let open = net.leg_to(u, v).expect("checked adjacent");
        let (term_inputs, grams) = self.leg_inputs(net, u, Some(open));
        let diagnostic = self.mode == EnvMode::Diagnostic;
        let with_grams = |inputs: &[Option<Matrix>]| -> Vec<Option<Matrix>> {
            inputs
                .iter()
                .zip(&grams)
                .map(|(f, g)| f.clone().or_else(|| g.clone()))
                .collect()
        };
        let mut terms = Vec::with_capacity(term_inputs.len());
        let gram;
        match net.node(u).data.clone() {
            NodeData::Classical(t) => {
                let others: Vec<usize> = (0..t.rank()).filter(|&k| k != open).collect();
                let (tm, _, _) = t.matricize(&others)?;
                let tm_adj = tm.adjoint();
                let env_of = |obs: &[Option<Matrix>]| -> Result<Matrix> {
                    let mut x = t.clone();
                    for (k, f) in obs.iter().enumerate() {
                        if let Some(f) = f {
                            x = x.apply_leg(k, f)?;
                        }
                    }
                    Ok(&tm_adj * x.matricize(&others)?.0)
                };
                for inputs in &term_inputs {
                    terms.push(if inputs.iter().all(Option::is_none) {
                        None
                    } else {
                        Some(env_of(&with_grams(inputs))?)
                    });
                }
                gram = if diagnostic { Some(env_of(&grams)?) } else { None };
            }
            NodeData::Quantum(q) => {
                let fold = net.fold;
                for inputs in &term_inputs {
                    terms.push(if inputs.iter().all(Option::is_none) {
                        None
                    } else {
                        let meter = if diagnostic { None } else { Some(&mut net.meter) };
                        Some(open_link_contraction(&q, &with_grams(inputs), open, fold, meter)?.matrix)
                    });
                }
                gram = if diagnostic {
                    Some(open_link_contraction(&q, &grams, open, fold, None)?.matrix)
                } else {
                    None
                };
            }
        }
        Ok(LinkEnv { version, gram, terms })
    }

    /// Local operator seen by the center node.
    pub fn effective_hamiltonian(&mut self, net: &mut TreeNetwork, c: usize) -> Result<EffectiveHamiltonian> {
        for w in net.neighbors(c) {
            self.ensure(net, w, c)?;
        }
        let (term_inputs, grams) = self.leg_inputs(net, c, None);
        let terms = self
            .op
            .terms
            .iter()
            .zip(term_inputs)
            .map(|(t, f)| (t.coeff, f))
            .collect();
        Ok(EffectiveHamiltonian {
            dims: net.node(c).dims(),
            terms,
            norms: grams,
            constant: self.op.constant,
        })
    }

    /// `<psi|H|psi> / <psi|psi>` evaluated at the center from cached
    /// environments. Quantum centers are contracted classically.
    pub fn energy(&mut self, net: &mut TreeNetwork) -> Result<f64> {
        let c = net.center();
        let h = self.effective_hamiltonian(net, c)?;
        let t = net.tensor(c)?;
        h.rayleigh(&t)
    }
}

/// `sum_t c_t ⊗_k F_{t,k}` on the legs of one node, with `None` factors
/// replaced by the leg's norm (identity if that is `None` too).
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub dims: Vec<usize>,
    pub terms: Vec<(C64, Vec<Option<Matrix>>)>,
    pub norms: Vec<Option<Matrix>>,
    pub constant: C64,
}

/// Largest dimension assembled densely.
pub const DENSE_HEFF_LIMIT: usize = 4096;

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn leg_matrix(&self, k: usize, f: &Option<Matrix>) -> Matrix {
        f.clone()
            .or_else(|| self.norms[k].clone())
            .unwrap_or_else(|| Matrix::identity(self.dims[k], self.dims[k]))
    }

    pub fn has_identity_norm(&self) -> bool {
        self.norms.iter().all(Option::is_none)
    }

    fn kron_all(&self, f: &[Option<Matrix>]) -> Matrix {
        (0..self.dims.len()).fold(Matrix::identity(1, 1), |acc, k| acc.kronecker(&self.leg_matrix(k, &f[k])))
    }

    pub fn norm_matrix(&self) -> Matrix {
        self.kron_all(&vec![None; self.dims.len()])
    }

    pub fn assemble(&self) -> Result<Matrix> {
        let d = self.dim();
        if d > DENSE_HEFF_LIMIT {
            return Err(Error::Size(format!("effective Hamiltonian of dimension {d}")));
        }
        let mut h = self.norm_matrix() * self.constant;
        for (c, f) in &self.terms {
            h += self.kron_all(f) * *c;
        }
        Ok(h)
    }

    fn apply_factors(&self, t: &Tensor, f: &[Option<Matrix>]) -> Result<Tensor> {
        let mut x = t.clone();
        for (k, m) in f.iter().enumerate() {
            if let Some(m) = m.as_ref().or(self.norms[k].as_ref()) {
                x = x.apply_leg(k, m)?;
            }
        }
        Ok(x)
    }

    pub fn apply(&self, t: &Tensor) -> Result<Tensor> {
        let none = vec![None; self.dims.len()];
        let mut out = self.apply_factors(t, &none)?;
        out.scale(self.constant);
        for (c, f) in &self.terms {
            let x = self.apply_factors(t, f)?;
            out.data_mut().iter_mut().zip(x.data()).for_each(|(o, v)| *o += c * v);
        }
        Ok(out)
    }

    /// `<t|H|t> / <t|N|t>`.
    pub fn rayleigh(&self, t: &Tensor) -> Result<f64> {
        let num = t.inner(&self.apply(t)?).re;
        let none = vec![None; self.dims.len()];
        let den = t.inner(&self.apply_factors(t, &none)?).re;
        if den <= 0.0 {
            return Err(Error::Diverged("nonpositive norm at the center".into()));
        }
        Ok(num / den)
    }
}

/// Lowest eigenpair of a Hermitian matrix with a basis-independent choice
/// inside a degenerate ground space: the normalized projection of the first
/// standard basis vector with non-negligible weight in that space, with that
/// component made real and positive.
pub fn lowest_eigenvector(h: &Matrix) -> Result<(f64, Vec<C64>)> {
    let e = eigh_matrix(h)?;
    let e0 = e.values[0];
    let tol = crate::consts::TOL.degeneracy * e0.abs().max(1.0);
    let g = e.values.iter().take_while(|&&x| x - e0 <= tol).count();
    let v = e.vectors.columns(0, g);
    let n = h.nrows();
    let mut best: Option<(usize, f64)> = None;
    for k in 0..n {
        let w: f64 = v.row(k).iter().map(|z| z.norm_sqr()).sum();
        if w > 1e-8 {
            best = Some((k, w));
            break;
        }
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((k, w));
        }
    }
    let (k, _) = best.expect("nonempty matrix");
    let mut x: Vec<C64> = (0..n)
        .map(|i| (0..g).map(|j| v[(i, j)] * v[(k, j)].conj()).sum())
        .collect();
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let phase = if x[k].norm() > 0.0 { x[k].conj() / x[k].norm() } else { C64::new(1.0, 0.0) };
    x.iter_mut().for_each(|z| *z *= phase / norm);
    Ok((e0, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{ising_1d, toric_code};
    use crate::tensor::ZERO;
    use crate::ttn::layout::{chain_order, domino_quadtree};

    fn dense_energy(op: &crate::pauli::OperatorSum, net: &TreeNetwork) -> f64 {
        let psi = net.dense_state().unwrap();
        op.expectation(&psi).unwrap() / psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    #[test]
    fn center_energy_matches_dense_contraction() {
        let op = ising_1d(8, 1.0, 0.8, true).unwrap();
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 4, 5).unwrap();
        let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
        let exact = dense_energy(&op, &net);
        for target in [4, 0, 2, 5, 3] {
            net.move_center(target).unwrap();
            let e = cache.energy(&mut net).unwrap();
            assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
        }
    }

    #[test]
    fn diagnostic_mode_works_without_isometry() {
        let op = toric_code(4, 4).unwrap();
        let mut net = TreeNetwork::binary_random(&[2; 16], &domino_quadtree(4, 4).unwrap(), 4, 2).unwrap();
        let a = net.tensor(0).unwrap().apply_leg(2, &Matrix::from_diagonal_element(4, 4, C64::new(2.0, 0.0))).unwrap();
        net.set_tensor(0, a).unwrap();
        let exact = dense_energy(&op, &net);
        let mut cache = EnvCache::diagnostic(LocalOperator::from_pauli(&op));
        let e = cache.energy(&mut net).unwrap();
        assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
    }

    #[test]
    fn cache_reuses_unchanged_links() {
        let op = ising_1d(8, 1.0, 1.0, false).unwrap();
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 4, 1).unwrap();
        let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
        cache.energy(&mut net).unwrap();
        let first = cache.computed;
        cache.energy(&mut net).unwrap();
        assert_eq!(cache.computed, first);
        net.shift_center(5).unwrap();
        cache.energy(&mut net).unwrap();
        assert_eq!(cache.computed, first + 1);
    }

    #[test]
    fn assembled_matches_applied() {
        let op = ising_1d(8, 1.0, 0.5, true).unwrap();
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 4, 9).unwrap();
        let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
        net.move_center(1).unwrap();
        let h = cache.effective_hamiltonian(&mut net, 1).unwrap();
        let t = net.tensor(1).unwrap();
        let dense = h.assemble().unwrap();
        let v = nalgebra::DVector::from_column_slice(t.data());
        let hv = &dense * &v;
        let applied = h.apply(&t).unwrap();
        let diff: f64 = hv.iter().zip(applied.data()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-12);
        assert!((&dense - dense.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn degenerate_choice_is_basis_independent() {
        let mut h = Matrix::zeros(3, 3);
        h[(2, 2)] = C64::new(1.0, 0.0);
        let (e, x) = lowest_eigenvector(&h).unwrap();
        assert_eq!(e, 0.0);
        assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let u = Matrix::from_row_slice(3, 3, &[
            C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO,
            C64::new(0.0, 0.8), C64::new(0.6, 0.0), ZERO,
            ZERO, ZERO, C64::new(1.0, 0.0),
        ]);
        let h2 = &u * &h * u.adjoint();
        let (_, y) = lowest_eigenvector(&h2).unwrap();
        let (_, y2) = lowest_eigenvector(&h2.clone()).unwrap();
        assert_eq!(y, y2);
        assert!(y[0].im.abs() < 1e-12 && y[0].re > 0.0);
    }
}
