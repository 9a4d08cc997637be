//! Single-node sweeps over a tree network.

use crate::consts::TOL;
use crate::error::{Error, Result};
use crate::pauli::OperatorSum;
use crate::tensor::Tensor;

use super::env::{lowest_eigenvector, EnvCache, EnvMode};
use super::local_op::LocalOperator;
use super::network::{NodeData, TreeNetwork};

/// Nodes in first-visit order of a depth-first walk from `root`, and the
/// full walk (each step moves to an adjacent node).
pub fn sweep_schedule(net: &TreeNetwork, root: usize) -> (Vec<usize>, Vec<usize>) {
    let mut order = Vec::with_capacity(net.n_nodes());
    let mut walk = vec![root];
    fn visit(net: &TreeNetwork, u: usize, parent: Option<usize>, order: &mut Vec<usize>, walk: &mut Vec<usize>) {
        order.push(u);
        for v in net.neighbors(u) {
            if Some(v) != parent {
                walk.push(v);
                visit(net, v, Some(u), order, walk);
                walk.push(u);
            }
        }
    }
    visit(net, root, None, &mut order, &mut walk);
    (order, walk)
}

/// Replaces a classical center by the lowest eigenvector of its effective
/// Hamiltonian and returns the eigenvalue.
pub fn optimize_center(net: &mut TreeNetwork, cache: &mut EnvCache) -> Result<f64> {
    let c = net.center();
    if net.node(c).is_quantum() {
        return Err(Error::Argument(format!("node {c} is quantum; use the hybrid optimizer")));
    }
    let h = cache.effective_hamiltonian(net, c)?;
    if !h.has_identity_norm() {
        return Err(Error::Argument("local solve requires an isometric network".into()));
    }
    let (e, v) = lowest_eigenvector(&h.assemble()?)?;
    net.set_tensor(c, Tensor::new(h.dims.clone(), v)?)?;
    Ok(e)
}

/// Walks the schedule from `root`, calling `local` at each node on its first
/// visit with the center there. Returns the last local energy.
pub fn sweep_with(
    net: &mut TreeNetwork,
    cache: &mut EnvCache,
    root: usize,
    local: &mut dyn FnMut(&mut TreeNetwork, &mut EnvCache) -> Result<f64>,
) -> Result<f64> {
    net.move_center(root)?;
    let (_, walk) = sweep_schedule(net, root);
    let mut visited = vec![false; net.n_nodes()];
    let mut energy = f64::NAN;
    for &u in &walk {
        net.move_center(u)?;
        if !visited[u] {
            visited[u] = true;
            energy = local(net, cache)?;
        }
    }
    Ok(energy)
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub max_sweeps: usize,
    /// Stop when consecutive sweep energies differ by less than this.
    pub tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 30,
            tol: TOL.sweep_convergence,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmrgReport {
    /// Energy after each sweep.
    pub energies: Vec<f64>,
    pub converged: bool,
}

/// Classical single-node DMRG sweeps rooted at the network's root.
pub fn dmrg(net: &mut TreeNetwork, op: &LocalOperator, opts: &SweepOptions) -> Result<DmrgReport> {
    if net.nodes().iter().any(|n| n.is_quantum()) {
        return Err(Error::Argument("dmrg needs an all-classical network".into()));
    }
    let mut cache = EnvCache::new(op.clone());
    let root = net.root();
    let mut energies = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let e = sweep_with(net, &mut cache, root, &mut |n, c| optimize_center(n, c))?;
        let done = energies.last().is_some_and(|&p: &f64| (p - e).abs() < opts.tol);
        energies.push(e);
        if done {
            converged = true;
            break;
        }
    }
    Ok(DmrgReport { energies, converged })
}

/// Exact, noiseless `<psi|H|psi> / <psi|psi>` of the whole network,
/// independent of where the center is or whether nodes are isometric.
pub fn exact_energy(net: &TreeNetwork, op: &OperatorSum) -> Result<f64> {
    let mut scratch = net.clone();
    scratch.meter = Default::default();
    let mut cache = EnvCache::diagnostic(LocalOperator::from_pauli(op));
    cache.energy(&mut scratch)
}

/// Lowest node whose subtree (hanging from the root) holds all of `sites`.
pub fn covering_node(net: &TreeNetwork, sites: &[usize]) -> Result<usize> {
    let root = net.root();
    let mut paths = Vec::with_capacity(sites.len());
    for &s in sites {
        let (node, _) = net
            .site_location(s)
            .ok_or_else(|| Error::Argument(format!("site {s} not in the network")))?;
        paths.push(net.path(root, node).expect("connected"));
    }
    let Some(first) = paths.first() else {
        return Ok(root);
    };
    let mut k = 0;
    while k < first.len() && paths.iter().all(|p| p.get(k) == Some(&first[k])) {
        k += 1;
    }
    Ok(first[k - 1])
}

/// `<psi|O|psi> / <psi|psi>` with the center moved to the node covering the
/// observable's support. Quantum centers are contracted classically.
pub fn expectation(net: &mut TreeNetwork, obs: &LocalOperator) -> Result<f64> {
    let mut support: Vec<usize> = obs.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.0)).collect();
    support.sort_unstable();
    support.dedup();
    let target = covering_node(net, &support)?;
    net.move_center(target)?;
    let mut cache = EnvCache::with_mode(obs.clone(), EnvMode::Algorithm);
    cache.energy(net)
}

/// Whether every node holds a classical tensor.
pub fn is_classical(net: &TreeNetwork) -> bool {
    net.nodes().iter().all(|n| matches!(n.data, NodeData::Classical(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{ground_energy, ising_1d, PauliTerm, Pauli};
    use crate::ttn::layout::chain_order;

    #[test]
    fn schedule_visits_every_node_once_and_returns() {
        let net = TreeNetwork::binary_random(&[2; 16], &chain_order(16), 2, 1).unwrap();
        let (order, walk) = sweep_schedule(&net, net.root());
        let mut o = order.clone();
        o.sort_unstable();
        assert_eq!(o, (0..net.n_nodes()).collect::<Vec<_>>());
        assert_eq!(walk.first(), walk.last());
        assert!(walk.windows(2).all(|w| net.leg_to(w[0], w[1]).is_some()));
    }

    #[test]
    fn dmrg_reaches_exact_ground_energy() {
        let op = ising_1d(8, 1.0, 1.0, true).unwrap();
        let exact = ground_energy(&op).unwrap();
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 16, 3).unwrap();
        let rep = dmrg(&mut net, &LocalOperator::from_pauli(&op), &SweepOptions::default()).unwrap();
        let e = *rep.energies.last().unwrap();
        assert!((e - exact).abs() < 1e-9, "{e} vs {exact}");
        assert!(rep.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((exact_energy(&net, &op).unwrap() - e).abs() < 1e-9);
        assert!(net.isometry_audit().unwrap() < 1e-10);
    }

    #[test]
    fn local_expectation_matches_dense() {
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), 4, 8).unwrap();
        let psi = net.dense_state().unwrap();
        let term = PauliTerm::real(1.0, [(2, Pauli::X), (3, Pauli::Z)]);
        let op = OperatorSum::from_terms(8, vec![term]).unwrap();
        let exact = op.expectation(&psi).unwrap();
        let v = expectation(&mut net, &LocalOperator::from_pauli(&op)).unwrap();
        assert!((v - exact).abs() < 1e-12);
        assert_eq!(net.center(), 1);
        let term = PauliTerm::real(1.0, [(0, Pauli::Y), (1, Pauli::Y)]);
        let op = OperatorSum::from_terms(8, vec![term]).unwrap();
        let exact = op.expectation(&psi).unwrap();
        let v = expectation(&mut net, &LocalOperator::from_pauli(&op)).unwrap();
        assert!((v - exact).abs() < 1e-12);
        assert_eq!(net.center(), 0);
    }
}
