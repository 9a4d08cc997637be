//! Building and sweeping networks that mix classical and quantum tensors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{arg, Error, Result};
use crate::pauli::OperatorSum;
use crate::qsim::{encode_state, fit_state, Circuit, EncodeOptions, Topology};
use crate::tensor::C64;
use crate::tensor::Matrix;
use crate::ttn::{
    chain_order, dmrg, exact_energy, optimize_center, random_isometry, sweep_with, BinaryTree, EffectiveHamiltonian,
    EnvCache, Leg, LocalOperator, NodeData, SweepOptions, TreeNetwork,
};

use super::isometrize::{implicit_isometrize, renormalize};
use super::vqe::{project_all, vqe_optimize, Strategy, VqeOptions, VqeReport};

/// Settings for re-initializing a quantum tensor from a classical
/// approximation (strategy iii) and for circuit construction in general.
#[derive(Clone, Debug)]
pub struct CircuitInit {
    /// Ladder circuits are extracted layer by layer; brick-wall circuits of
    /// `m + e` layers are fitted to the target from near-identity parameters.
    pub topology: Topology,
    /// Ladder layers extracted from the classical state.
    pub m: usize,
    /// Near-identity layers appended afterwards.
    pub e: usize,
    /// Standard deviation of the appended layers' parameters.
    pub sigma: f64,
    /// Fidelity-fit iterations after construction.
    pub polish_iters: usize,
    pub seed: u64,
}

impl Default for CircuitInit {
    fn default() -> Self {
        Self {
            topology: Topology::Ladder,
            m: 2,
            e: 0,
            sigma: 0.01,
            polish_iters: 0,
            seed: 0,
        }
    }
}

/// Circuit approximating `target` per `init`, with its fidelity.
pub fn circuit_for_state(target: &[C64], init: &CircuitInit) -> Result<(Circuit, Vec<f64>, f64)> {
    match init.topology {
        Topology::Ladder => {
            let enc = encode_state(
                target,
                &EncodeOptions {
                    layers: init.m,
                    polish_iters: init.polish_iters,
                },
            )?;
            let (c, p) = enc.circuit.extend_layers(&enc.params, init.e, init.sigma, init.seed)?;
            Ok((c, p, enc.fidelity))
        }
        Topology::BrickWall => {
            let n = target.len().trailing_zeros() as usize;
            let c = Circuit::brick_wall(n, init.m + init.e)?;
            let normal = Normal::new(0.0, init.sigma).map_err(|e| Error::Argument(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
            let p0: Vec<f64> = (0..c.n_params()).map(|_| normal.sample(&mut rng)).collect();
            let norm = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let t: Vec<C64> = target.iter().map(|z| z / norm).collect();
            let (p, f) = fit_state(&c, &p0, &t, init.polish_iters)?;
            Ok((c, p, f))
        }
        Topology::Custom => arg("custom circuits cannot be initialized from a state"),
    }
}

/// Replaces all non-bottom nodes of a classical binary tree by one quantum
/// tensor encoding their contraction. Returns the hybrid network (center at
/// the quantum tensor) and the encoding fidelity.
pub fn hybrid_from_classical(classical: &TreeNetwork, init: &CircuitInit) -> Result<(TreeNetwork, f64)> {
    let n = classical.n_sites();
    let tree = BinaryTree::new(&chain_order(n), classical.site_dims(), 1)?;
    let bottom: Vec<usize> = tree.bottom_nodes().collect();
    let mut net = classical.clone();
    net.move_center(tree.top())?;
    let upper: Vec<usize> = (bottom.len()..net.n_nodes()).collect();
    let (t, legs) = net.contract_nodes(&upper)?;
    let mut order = Vec::with_capacity(legs.len());
    for &(node, leg) in &legs {
        match net.node(node).legs[leg] {
            Leg::Bond(b) if b < bottom.len() => order.push(b),
            _ => return arg("upper nodes must connect only to bottom nodes"),
        }
    }
    let axes: Vec<usize> = (0..bottom.len())
        .map(|b| order.iter().position(|&x| x == b).expect("every bottom node links up"))
        .collect();
    let t = t.permute(&axes)?;
    let mut leg_qubits = Vec::with_capacity(bottom.len());
    for &d in t.shape() {
        if !d.is_power_of_two() || d < 2 {
            return arg(format!("interface dimension {d} is not a power of two"));
        }
        leg_qubits.push(d.trailing_zeros() as usize);
    }
    let (circuit, params, fidelity) = circuit_for_state(t.data(), init)?;
    let qt = super::QuantumTensor::new(circuit, params, leg_qubits)?;
    let q = bottom.len();
    let mut nodes = Vec::with_capacity(q + 1);
    for &b in &bottom {
        let mut legs = net.node(b).legs.clone();
        legs[2] = Leg::Bond(q);
        nodes.push((legs, net.node(b).data.clone()));
    }
    nodes.push(((0..q).map(Leg::Bond).collect(), NodeData::Quantum(qt)));
    let mut out = TreeNetwork::from_nodes(nodes, classical.site_dims().to_vec(), q)?;
    out.set_root(q)?;
    Ok((out, fidelity))
}

/// Binary tree over a lattice with random unitary bottom nodes and quantum
/// tensors everywhere above, each on `3 * qubits_per_leg` qubits in a
/// brick-wall circuit with parameters uniform in `[-pi, pi)`.
///
/// The tensors are made consistent by isometrizing every quantum tensor
/// toward the first top node, which becomes the normalized center.
pub fn multi_quantum_tree(
    site_dims: &[usize],
    leaf_order: &[usize],
    qubits_per_leg: usize,
    layers: usize,
    seed: u64,
) -> Result<TreeNetwork> {
    let chi = 1usize << qubits_per_leg;
    let tree = BinaryTree::new(leaf_order, site_dims, chi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bottom = tree.bottom_nodes();
    let mut nodes = Vec::with_capacity(tree.n_nodes());
    for i in 0..tree.n_nodes() {
        let data = if bottom.contains(&i) {
            NodeData::Classical(random_isometry(&tree.dims[i], &mut rng)?)
        } else {
            if tree.dims[i].iter().any(|&d| d != chi) {
                return arg(format!("upper node {i} has dims {:?}, expected {chi}", tree.dims[i]));
            }
            let circuit = Circuit::brick_wall(3 * qubits_per_leg, layers)?;
            let params = (0..circuit.n_params())
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            NodeData::Quantum(super::QuantumTensor::new(circuit, params, vec![qubits_per_leg; 3])?)
        };
        nodes.push((tree.legs[i].clone(), data));
    }
    let top = tree.top();
    let mut net = TreeNetwork::from_nodes(nodes, site_dims.to_vec(), top)?;
    for layer in 1..tree.n_layers() {
        for i in tree.layer_offsets[layer]..tree.layer_offsets[layer + 1] {
            if i == top {
                continue;
            }
            let parent = net.parent(i, top).expect("non-root");
            let leg = net.leg_to(i, parent).expect("adjacent");
            let back = net.leg_to(parent, i).expect("adjacent");
            let fold = net.fold;
            let r = implicit_isometrize(net.quantum_mut(i)?, leg, fold, None)?;
            net.absorb(parent, back, &r)?;
        }
    }
    renormalize(net.quantum_mut(top)?)?;
    Ok(net)
}

/// Appends wrap gates to the circuit of quantum node `i`.
pub fn add_wrap_gates(net: &mut TreeNetwork, i: usize) -> Result<()> {
    let qt = net.quantum_mut(i)?;
    let (c, p) = qt.circuit().add_wrap_gates(qt.params())?;
    qt.set_circuit(c, p)
}

/// Settings for hybrid sweeps.
#[derive(Clone, Debug)]
pub struct HybridOptions {
    pub strategy: Strategy,
    pub vqe: VqeOptions,
    /// Bond dimension of the classical approximation used by strategy iii.
    pub reinit_chi: usize,
    pub reinit: CircuitInit,
}

impl Default for HybridOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Unitary,
            vqe: VqeOptions::default(),
            reinit_chi: 4,
            reinit: CircuitInit::default(),
        }
    }
}

/// Outcome of one hybrid sweep.
#[derive(Clone, Debug)]
pub struct SweepRecord {
    /// Exact, noiseless energy of the network after the sweep.
    pub energy: f64,
    pub vqe_iterations: usize,
    /// Tomography settings consumed during the sweep.
    pub tomography_settings: u64,
    /// Measured loss per optimizer iteration, concatenated over quantum tensors.
    pub vqe_losses: Vec<f64>,
}

/// Rebuilds a quantum tensor's circuit from the best classical binary tree
/// over its legs (each leg a site) in its effective Hamiltonian, then resets
/// its `P` matrices.
pub fn reinit_from_classical(
    qt: &mut super::QuantumTensor,
    heff: &EffectiveHamiltonian,
    chi: usize,
    init: &CircuitInit,
) -> Result<f64> {
    let dims = qt.leg_dims();
    let mut op = LocalOperator::new(dims.clone());
    for (c, f) in &heff.terms {
        let factors: Vec<(usize, Matrix)> = f
            .iter()
            .enumerate()
            .filter_map(|(l, m)| m.clone().map(|m| (l, m)))
            .collect();
        op.push(*c, factors)?;
    }
    op.constant += heff.constant;
    let mut sub = TreeNetwork::binary_random(&dims, &chain_order(dims.len()), chi, init.seed)?;
    dmrg(&mut sub, &op, &SweepOptions::default())?;
    let target = sub.dense_state()?;
    let (c, p, fidelity) = circuit_for_state(&target, init)?;
    qt.set_circuit(c, p)?;
    qt.reset_p();
    Ok(fidelity)
}

/// Strategy handling and VQE for the quantum center.
pub fn optimize_quantum_center(net: &mut TreeNetwork, cache: &mut EnvCache, opts: &HybridOptions) -> Result<VqeReport> {
    let c = net.center();
    let heff = cache.effective_hamiltonian(net, c)?;
    let mut meter = std::mem::take(&mut net.meter);
    let result = (|| {
        let qt = net.quantum_mut(c)?;
        if !qt.p_is_identity(0.0) {
            match opts.strategy {
                Strategy::Penalty => {}
                Strategy::Unitary => project_all(qt)?,
                Strategy::Reinit => {
                    reinit_from_classical(qt, &heff, opts.reinit_chi, &opts.reinit)?;
                }
            }
        }
        vqe_optimize(qt, &heff, &opts.vqe, &mut meter)
    })();
    net.meter = meter;
    result
}

/// One hybrid sweep: starts at the root quantum tensor (or the first quantum
/// tensor), optimizes every node on first visit and returns the center there.
pub fn httn_sweep(net: &mut TreeNetwork, cache: &mut EnvCache, op: &OperatorSum, opts: &HybridOptions) -> Result<SweepRecord> {
    let quantum = net.quantum_nodes();
    let Some(&first) = quantum.first() else {
        return arg("hybrid sweeps need at least one quantum tensor");
    };
    let root = if net.node(net.root()).is_quantum() { net.root() } else { first };
    let settings0 = net.meter.tomography_settings;
    let mut iters = 0;
    let mut losses = Vec::new();
    sweep_with(net, cache, root, &mut |n, c| {
        if n.node(n.center()).is_quantum() {
            let rep = optimize_quantum_center(n, c, opts)?;
            iters += rep.iterations;
            losses.extend_from_slice(&rep.losses);
            Ok(rep.energy)
        } else {
            optimize_center(n, c)
        }
    })?;
    let energy = exact_energy(net, op)?;
    if !energy.is_finite() {
        return Err(Error::Diverged("non-finite network energy".into()));
    }
    Ok(SweepRecord {
        energy,
        vqe_iterations: iters,
        tomography_settings: net.meter.tomography_settings - settings0,
        vqe_losses: losses,
    })
}

/// Classical reference: binary tree at bond dimension `chi`, optimized by
/// DMRG from a seeded random start.
pub fn classical_reference(
    op: &OperatorSum,
    leaf_order: &[usize],
    chi: usize,
    seed: u64,
    sweeps: &SweepOptions,
) -> Result<(TreeNetwork, f64)> {
    let mut net = TreeNetwork::binary_random(&vec![2; op.n_sites()], leaf_order, chi, seed)?;
    let rep = dmrg(&mut net, &LocalOperator::from_pauli(op), sweeps)?;
    let e = *rep.energies.last().ok_or_else(|| Error::Argument("no sweeps run".into()))?;
    Ok((net, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htensor::Meter;
    use crate::pauli::{ground_energy, ising_1d, toric_code};
    use crate::ttn::domino_quadtree;

    #[test]
    fn hybrid_init_preserves_bottom_and_encodes_top() {
        let op = ising_1d(8, 1.0, 1.0, true).unwrap();
        let (classical, e_c) = classical_reference(&op, &chain_order(8), 4, 1, &SweepOptions::default()).unwrap();
        let (net, fid) = hybrid_from_classical(
            &classical,
            &CircuitInit {
                m: 3,
                ..CircuitInit::default()
            },
        )
        .unwrap();
        assert_eq!(net.n_nodes(), 5);
        assert_eq!(net.center(), 4);
        assert!(fid > 0.9, "{fid}");
        let e = exact_energy(&net, &op).unwrap();
        assert!(e > e_c - 1e-9 && e < e_c + 0.5, "{e} vs {e_c}");
        assert!(net.isometry_audit().unwrap() < 1e-10);
    }

    #[test]
    fn multi_quantum_tree_is_consistent() {
        let order = domino_quadtree(4, 4).unwrap();
        let net = multi_quantum_tree(&[2; 16], &order, 2, 3, 5).unwrap();
        assert_eq!(net.quantum_nodes().len(), 6);
        assert!(net.isometry_audit().unwrap() < 1e-10);
        let psi = net.dense_state().unwrap();
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-10);
        let op = toric_code(4, 4).unwrap();
        let e = exact_energy(&net, &op).unwrap();
        assert!((e - op.expectation(&psi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn hybrid_sweep_improves_on_the_interface() {
        let op = ising_1d(8, 1.0, 1.0, true).unwrap();
        let exact = ground_energy(&op).unwrap();
        let (classical, e_c) = classical_reference(&op, &chain_order(8), 4, 1, &SweepOptions::default()).unwrap();
        let (mut net, _) = hybrid_from_classical(
            &classical,
            &CircuitInit {
                e: 2,
                ..CircuitInit::default()
            },
        )
        .unwrap();
        net.meter = Meter::default();
        let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
        let opts = HybridOptions {
            vqe: VqeOptions {
                max_iters: 200,
                ..VqeOptions::default()
            },
            ..HybridOptions::default()
        };
        let mut last = f64::INFINITY;
        for _ in 0..3 {
            let rec = httn_sweep(&mut net, &mut cache, &op, &opts).unwrap();
            assert!(rec.tomography_settings > 0);
            last = rec.energy;
        }
        assert!(last - exact < e_c - exact, "{last} vs classical {e_c}, exact {exact}");
        assert_eq!(net.center(), 4);
    }
}
