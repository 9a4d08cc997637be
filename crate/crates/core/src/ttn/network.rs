//! Tree tensor networks with classical and quantum nodes.

use std::collections::VecDeque;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::htensor::isometrize::implicit_isometrize;
use crate::htensor::{exact_open_link, Fold, Meter, QuantumTensor};
use crate::tensor::{contract, isometry_defect, qr_matrix, Matrix, Tensor, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Leg {
    /// Physical index of a lattice site.
    Site(usize),
    /// Link to another node.
    Bond(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum NodeData {
    Classical(Tensor),
    Quantum(QuantumTensor),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub legs: Vec<Leg>,
    pub data: NodeData,
    /// Clock value of the last modification.
    pub stamp: u64,
}

impl Node {
    pub fn dims(&self) -> Vec<usize> {
        match &self.data {
            NodeData::Classical(t) => t.shape().to_vec(),
            NodeData::Quantum(q) => q.leg_dims(),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self.data, NodeData::Quantum(_))
    }
}

/// A tree of tensors with a single orthogonality center.
///
/// Every node other than the center is kept isometric toward it, so local
/// environments reduce to identities in the norm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeNetwork {
    nodes: Vec<Node>,
    site_dims: Vec<usize>,
    center: usize,
    root: usize,
    clock: u64,
    #[serde(default)]
    pub fold: Fold,
    #[serde(skip)]
    pub meter: Meter,
}

impl TreeNetwork {
    /// Validates legs and dimensions and assembles a network.
    pub fn from_nodes(nodes: Vec<(Vec<Leg>, NodeData)>, site_dims: Vec<usize>, center: usize) -> Result<Self> {
        let n = nodes.len();
        if n == 0 || center >= n {
            return arg("network needs nodes and a valid center");
        }
        let nodes: Vec<Node> = nodes
            .into_iter()
            .map(|(legs, data)| Node { legs, data, stamp: 0 })
            .collect();
        let mut seen = vec![false; site_dims.len()];
        let mut edges = 0;
        for (i, node) in nodes.iter().enumerate() {
            let dims = node.dims();
            if dims.len() != node.legs.len() {
                return Err(Error::Dimension(format!("node {i} has {} legs and rank {}", node.legs.len(), dims.len())));
            }
            for (k, leg) in node.legs.iter().enumerate() {
                match *leg {
                    Leg::Site(s) => {
                        if s >= site_dims.len() || seen[s] {
                            return arg(format!("site {s} missing from the lattice or attached twice"));
                        }
                        seen[s] = true;
                        if dims[k] != site_dims[s] {
                            return Err(Error::Dimension(format!("site {s} has dim {}, node {i} leg {k} has {}", site_dims[s], dims[k])));
                        }
                    }
                    Leg::Bond(j) => {
                        if j >= n || j == i {
                            return arg(format!("node {i} links to invalid node {j}"));
                        }
                        let back: Vec<usize> = nodes[j]
                            .legs
                            .iter()
                            .enumerate()
                            .filter(|(_, l)| **l == Leg::Bond(i))
                            .map(|(kk, _)| kk)
                            .collect();
                        if back.len() != 1 || node.legs.iter().filter(|l| **l == Leg::Bond(j)).count() != 1 {
                            return arg(format!("link {i}-{j} is not a single symmetric bond"));
                        }
                        if nodes[j].dims()[back[0]] != dims[k] {
                            return Err(Error::Dimension(format!("bond {i}-{j} has mismatched dims")));
                        }
                        edges += 1;
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return arg("every site must attach to exactly one node");
        }
        if edges != 2 * (n - 1) {
            return arg("nodes do not form a tree");
        }
        let mut net = Self {
            nodes,
            site_dims,
            center,
            root: center,
            clock: 0,
            fold: Fold::default(),
            meter: Meter::default(),
        };
        if (1..n).any(|i| net.path(0, i).is_none()) {
            return arg("nodes do not form a connected tree");
        }
        for i in 0..n {
            net.touch(i);
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    /// Node the tree is rooted at for sweeps and covering-node queries.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn set_root(&mut self, r: usize) -> Result<()> {
        if r >= self.nodes.len() {
            return arg("root out of range");
        }
        self.root = r;
        Ok(())
    }

    pub fn stamp(&self, i: usize) -> u64 {
        self.nodes[i].stamp
    }

    pub(crate) fn touch(&mut self, i: usize) {
        self.clock += 1;
        self.nodes[i].stamp = self.clock;
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.nodes[i]
            .legs
            .iter()
            .filter_map(|l| match l {
                Leg::Bond(j) => Some(*j),
                Leg::Site(_) => None,
            })
            .collect()
    }

    /// Leg of node `i` that links to node `j`.
    pub fn leg_to(&self, i: usize, j: usize) -> Option<usize> {
        self.nodes[i].legs.iter().position(|l| *l == Leg::Bond(j))
    }

    /// Node and leg holding site `s`.
    pub fn site_location(&self, s: usize) -> Option<(usize, usize)> {
        self.nodes.iter().enumerate().find_map(|(i, n)| {
            n.legs.iter().position(|l| *l == Leg::Site(s)).map(|k| (i, k))
        })
    }

    /// Node sequence from `from` to `to`, inclusive.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut parent = vec![usize::MAX; n];
        parent[from] = from;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            if u == to {
                break;
            }
            for v in self.neighbors(u) {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    q.push_back(v);
                }
            }
        }
        if parent[to] == usize::MAX {
            return None;
        }
        let mut p = vec![to];
        while *p.last().expect("nonempty") != from {
            p.push(parent[*p.last().expect("nonempty")]);
        }
        p.reverse();
        Some(p)
    }

    /// Nodes on `u`'s side of the link `u - v`, starting with `u`.
    pub fn subtree(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut stack = vec![(u, v)];
        while let Some((x, from)) = stack.pop() {
            for y in self.neighbors(x) {
                if y != from {
                    out.push(y);
                    stack.push((y, x));
                }
            }
        }
        out
    }

    /// Sites on `u`'s side of the link `u - v`.
    pub fn subtree_sites(&self, u: usize, v: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .subtree(u, v)
            .into_iter()
            .flat_map(|x| {
                self.nodes[x].legs.iter().filter_map(|l| match l {
                    Leg::Site(s) => Some(*s),
                    Leg::Bond(_) => None,
                })
            })
            .collect();
        s.sort_unstable();
        s
    }

    /// Children of `u` when the tree hangs from `root`.
    pub fn children(&self, u: usize, root: usize) -> Vec<usize> {
        let parent = self.parent(u, root);
        self.neighbors(u).into_iter().filter(|&v| Some(v) != parent).collect()
    }

    pub fn parent(&self, u: usize, root: usize) -> Option<usize> {
        if u == root {
            return None;
        }
        self.path(u, root).map(|p| p[1])
    }

    /// Dense tensor of node `i`.
    pub fn tensor(&self, i: usize) -> Result<Tensor> {
        match &self.nodes[i].data {
            NodeData::Classical(t) => Ok(t.clone()),
            NodeData::Quantum(q) => q.dense(),
        }
    }

    pub fn set_tensor(&mut self, i: usize, t: Tensor) -> Result<()> {
        if t.shape() != self.nodes[i].dims().as_slice() {
            return Err(Error::Dimension(format!("replacement for node {i} has shape {:?}", t.shape())));
        }
        self.nodes[i].data = NodeData::Classical(t);
        self.touch(i);
        Ok(())
    }

    pub fn quantum(&self, i: usize) -> Option<&QuantumTensor> {
        match &self.nodes[i].data {
            NodeData::Quantum(q) => Some(q),
            NodeData::Classical(_) => None,
        }
    }

    /// Mutable access to a quantum node; marks it modified.
    pub fn quantum_mut(&mut self, i: usize) -> Result<&mut QuantumTensor> {
        self.touch(i);
        match &mut self.nodes[i].data {
            NodeData::Quantum(q) => Ok(q),
            NodeData::Classical(_) => arg(format!("node {i} is classical")),
        }
    }

    pub fn set_quantum(&mut self, i: usize, q: QuantumTensor) -> Result<()> {
        if q.leg_dims() != self.nodes[i].dims() {
            return Err(Error::Dimension(format!("quantum tensor for node {i} has dims {:?}", q.leg_dims())));
        }
        self.nodes[i].data = NodeData::Quantum(q);
        self.touch(i);
        Ok(())
    }

    pub fn quantum_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_quantum()).collect()
    }

    /// Absorbs `r` into leg `leg` of node `i`: `T[.., a, ..] <- sum_b r[a, b] T[.., b, ..]`.
    pub fn absorb(&mut self, i: usize, leg: usize, r: &Matrix) -> Result<()> {
        match &mut self.nodes[i].data {
            NodeData::Classical(t) => *t = t.apply_leg(leg, r)?,
            NodeData::Quantum(q) => {
                if r.nrows() != r.ncols() {
                    return Err(Error::Dimension("quantum legs need square absorption".into()));
                }
                q.absorb(leg, r)?
            }
        }
        self.touch(i);
        Ok(())
    }

    /// Moves the center to an adjacent node, making the old center
    /// isometric toward it.
    pub fn shift_center(&mut self, target: usize) -> Result<()> {
        let c = self.center;
        let Some(leg) = self.leg_to(c, target) else {
            return Err(Error::Path { from: c, to: target });
        };
        let back = self.leg_to(target, c).expect("bonds are symmetric");
        let r = match &mut self.nodes[c].data {
            NodeData::Classical(t) => {
                let others: Vec<usize> = (0..t.rank()).filter(|&k| k != leg).collect();
                let (m, rows, _) = t.matricize(&others)?;
                let (q, r) = qr_matrix(&m);
                if q.ncols() != m.ncols() {
                    return Err(Error::Dimension(format!(
                        "link {c}-{target} of dim {} exceeds the rank of node {c}",
                        m.ncols()
                    )));
                }
                let mut shape = rows;
                shape.push(q.ncols());
                let qt = Tensor::from_matrix(&q, &shape)?;
                let mut axes: Vec<usize> = (0..others.len()).collect();
                axes.insert(leg, others.len());
                *t = qt.permute(&axes)?;
                r
            }
            NodeData::Quantum(q) => implicit_isometrize(q, leg, self.fold, Some(&mut self.meter))?,
        };
        self.touch(c);
        self.absorb(target, back, &r)?;
        self.center = target;
        Ok(())
    }

    /// Moves the center along the tree path to `target`.
    pub fn move_center(&mut self, target: usize) -> Result<()> {
        if target >= self.nodes.len() {
            return arg(format!("node {target} out of range"));
        }
        let p = self.path(self.center, target).expect("tree is connected");
        for &v in &p[1..] {
            self.shift_center(v)?;
        }
        Ok(())
    }

    /// Norm of the represented state, read off the center.
    pub fn center_norm(&self) -> Result<f64> {
        match &self.nodes[self.center].data {
            NodeData::Classical(t) => Ok(t.norm()),
            NodeData::Quantum(q) => Ok(q.norm_sqr()?.sqrt()),
        }
    }

    /// Scales the center to unit norm.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.center_norm()?;
        if n == 0.0 {
            return Err(Error::Diverged("zero-norm center".into()));
        }
        let c = self.center;
        match &mut self.nodes[c].data {
            NodeData::Classical(t) => t.scale(C64::new(1.0 / n, 0.0)),
            NodeData::Quantum(q) => q.scale(1.0 / n),
        }
        self.touch(c);
        Ok(())
    }

    /// Contracts a connected set of nodes. Returns the tensor and, for each of
    /// its legs, the `(node, leg)` it came from.
    pub fn contract_nodes(&self, set: &[usize]) -> Result<(Tensor, Vec<(usize, usize)>)> {
        let Some(&first) = set.first() else {
            return arg("empty node set");
        };
        let mut acc = self.tensor(first)?;
        let mut legs: Vec<(usize, usize)> = (0..acc.rank()).map(|k| (first, k)).collect();
        let mut done = vec![first];
        let mut pending: Vec<usize> = set[1..].to_vec();
        while !pending.is_empty() {
            let pos = pending
                .iter()
                .position(|&m| done.iter().any(|&d| self.leg_to(d, m).is_some()))
                .ok_or_else(|| Error::Argument("node set is not connected".into()))?;
            let m = pending.remove(pos);
            let tm = self.tensor(m)?;
            let mut pairs = Vec::new();
            for (k, &(owner, ol)) in legs.iter().enumerate() {
                if self.nodes[owner].legs[ol] == Leg::Bond(m) {
                    pairs.push((k, self.leg_to(m, owner).expect("symmetric")));
                }
            }
            acc = contract(&acc, &tm, &pairs)?;
            let used_a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let used_b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let mut nl: Vec<(usize, usize)> = legs
                .iter()
                .enumerate()
                .filter(|(k, _)| !used_a.contains(k))
                .map(|(_, l)| *l)
                .collect();
            nl.extend((0..tm.rank()).filter(|k| !used_b.contains(k)).map(|k| (m, k)));
            legs = nl;
            done.push(m);
        }
        Ok((acc, legs))
    }

    /// Full state vector in site order; limited to `2^16` amplitudes.
    pub fn dense_state(&self) -> Result<Vec<C64>> {
        let dim = self
            .site_dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d).filter(|&x| x <= 1 << 16));
        if dim.is_none() {
            return Err(Error::Size("dense state beyond 2^16 amplitudes".into()));
        }
        let all: Vec<usize> = (0..self.nodes.len()).collect();
        let (t, legs) = self.contract_nodes(&all)?;
        let sites: Vec<usize> = legs
            .iter()
            .map(|&(i, k)| match self.nodes[i].legs[k] {
                Leg::Site(s) => s,
                Leg::Bond(_) => unreachable!("all bonds are contracted"),
            })
            .collect();
        let axes = inverse(&sites);
        Ok(t.permute(&axes)?.into_data())
    }

    /// Largest deviation from isometry toward the center over all other nodes.
    pub fn isometry_audit(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.nodes.len() {
            if i == self.center {
                continue;
            }
            let p = self.path(i, self.center).expect("connected");
            let leg = self.leg_to(i, p[1]).expect("adjacent");
            let d = match &self.nodes[i].data {
                NodeData::Classical(t) => {
                    let others: Vec<usize> = (0..t.rank()).filter(|&k| k != leg).collect();
                    isometry_defect(&t.matricize(&others)?.0)
                }
                NodeData::Quantum(q) => {
                    let obs = vec![None; q.n_legs()];
                    let g = exact_open_link(q, &obs, leg)?;
                    (g - Matrix::identity(q.leg_dims()[leg], q.leg_dims()[leg])).norm()
                }
            };
            worst = worst.max(d);
        }
        Ok(worst)
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Legs and bond dimensions of a binary tree over sites listed in `leaf_order`.
///
/// Bottom nodes hold consecutive leaf pairs, each layer halves, and the two
/// top nodes are linked to each other. Nodes are numbered bottom-up, so the
/// second-to-last node is the first top node.
#[derive(Clone, Debug)]
pub struct BinaryTree {
    pub legs: Vec<Vec<Leg>>,
    pub dims: Vec<Vec<usize>>,
    pub layer_offsets: Vec<usize>,
}

impl BinaryTree {
    pub fn new(leaf_order: &[usize], site_dims: &[usize], chi: usize) -> Result<Self> {
        let n = leaf_order.len();
        if n < 4 || !n.is_power_of_two() {
            return arg(format!("binary tree needs a power-of-two number of sites >= 4, got {n}"));
        }
        if chi == 0 {
            return arg("bond dimension must be positive");
        }
        let mut sizes = vec![n / 2];
        while *sizes.last().expect("nonempty") > 2 {
            sizes.push(sizes.last().expect("nonempty") / 2);
        }
        let mut offsets = vec![0];
        for s in &sizes {
            offsets.push(offsets.last().expect("nonempty") + s);
        }
        let total = offsets[sizes.len()];
        let top = sizes.len() - 1;
        let cap = |a: usize, b: usize| a.saturating_mul(b).min(chi);
        let mut legs = vec![Vec::new(); total];
        let mut below = vec![0usize; total];
        for (layer, &size) in sizes.iter().enumerate() {
            for j in 0..size {
                let i = offsets[layer] + j;
                let (c0, c1) = if layer == 0 {
                    let (a, b) = (leaf_order[2 * j], leaf_order[2 * j + 1]);
                    below[i] = cap(site_dims[a], site_dims[b]);
                    (Leg::Site(a), Leg::Site(b))
                } else {
                    let (a, b) = (offsets[layer - 1] + 2 * j, offsets[layer - 1] + 2 * j + 1);
                    below[i] = cap(below[a], below[b]);
                    (Leg::Bond(a), Leg::Bond(b))
                };
                let up = if layer == top {
                    Leg::Bond(offsets[layer] + 1 - j)
                } else {
                    Leg::Bond(offsets[layer + 1] + j / 2)
                };
                legs[i] = vec![c0, c1, up];
            }
        }
        let mut other = vec![0usize; total];
        other[offsets[top]] = below[offsets[top] + 1];
        other[offsets[top] + 1] = below[offsets[top]];
        for layer in (0..top).rev() {
            for j in 0..sizes[layer] {
                let i = offsets[layer] + j;
                let parent = offsets[layer + 1] + j / 2;
                let sibling = offsets[layer] + (j ^ 1);
                other[i] = cap(other[parent], below[sibling]);
            }
        }
        let up_dim: Vec<usize> = (0..total).map(|i| chi.min(below[i]).min(other[i])).collect();
        let dims = (0..total)
            .map(|i| {
                legs[i]
                    .iter()
                    .enumerate()
                    .map(|(k, l)| match *l {
                        Leg::Site(s) => site_dims[s],
                        Leg::Bond(_) if k == 2 => up_dim[i],
                        Leg::Bond(j) => up_dim[j],
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            legs,
            dims,
            layer_offsets: offsets,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.legs.len()
    }

    /// First of the two linked top nodes.
    pub fn top(&self) -> usize {
        self.legs.len() - 2
    }

    pub fn n_layers(&self) -> usize {
        self.layer_offsets.len() - 1
    }

    pub fn bottom_nodes(&self) -> std::ops::Range<usize> {
        0..self.layer_offsets[1]
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Random tensor with shape `dims` that is an isometry from its last leg.
pub fn random_isometry(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Tensor> {
    let (&up, rest) = dims.split_last().ok_or_else(|| Error::Argument("empty shape".into()))?;
    let rows: usize = rest.iter().product();
    if up > rows {
        return arg("isometry wider than its domain");
    }
    let (q, _) = qr_matrix(&gaussian_matrix(rows, up, rng));
    Tensor::from_matrix(&q, dims)
}

impl TreeNetwork {
    /// Binary tree with random isometries and a random normalized center at
    /// the first top node.
    pub fn binary_random(site_dims: &[usize], leaf_order: &[usize], chi: usize, seed: u64) -> Result<Self> {
        let tree = BinaryTree::new(leaf_order, site_dims, chi)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = tree.top();
        let mut nodes = Vec::with_capacity(tree.n_nodes());
        for i in 0..tree.n_nodes() {
            let dims = &tree.dims[i];
            let t = if i == top {
                let n: usize = dims.iter().product();
                let m = gaussian_matrix(n, 1, &mut rng);
                let m = &m / C64::new(m.norm(), 0.0);
                Tensor::new(dims.clone(), m.iter().copied().collect())?
            } else {
                random_isometry(dims, &mut rng)?
            };
            nodes.push((tree.legs[i].clone(), NodeData::Classical(t)));
        }
        Self::from_nodes(nodes, site_dims.to_vec(), top)
    }

    /// Binary tree representing the product state with site `s` in basis
    /// state `states[s]`; every non-center node is an isometry.
    pub fn binary_product(site_dims: &[usize], leaf_order: &[usize], chi: usize, states: &[usize]) -> Result<Self> {
        if states.len() != site_dims.len() || states.iter().zip(site_dims).any(|(&s, &d)| s >= d) {
            return arg("one basis state per site is required");
        }
        let tree = BinaryTree::new(leaf_order, site_dims, chi)?;
        let top = tree.top();
        let mut nodes = Vec::with_capacity(tree.n_nodes());
        for i in 0..tree.n_nodes() {
            let dims = tree.dims[i].clone();
            let relabel = |k: usize, x: usize| match tree.legs[i][k] {
                Leg::Site(s) if x == 0 => states[s],
                Leg::Site(s) if x == states[s] => 0,
                _ => x,
            };
            let t = if i == top {
                let mut t = Tensor::zeros(&dims);
                t.data_mut()[0] = C64::new(1.0, 0.0);
                t
            } else {
                Tensor::from_fn(&dims, |idx| {
                    let (a, b) = (relabel(0, idx[0]), relabel(1, idx[1]));
                    if a * dims[1] + b == idx[2] {
                        C64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                })
            };
            nodes.push((tree.legs[i].clone(), NodeData::Classical(t)));
        }
        Self::from_nodes(nodes, site_dims.to_vec(), top)
    }
}
