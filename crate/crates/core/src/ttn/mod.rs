//! Tree tensor networks: structure, environments and sweeping optimization.

pub mod env;
pub mod layout;
pub mod local_op;
pub mod network;
pub mod sweep;

pub use env::{lowest_eigenvector, EffectiveHamiltonian, EnvCache, EnvMode, LinkEnv};
pub use layout::{chain_order, domino_quadtree};
pub use local_op::{LocalOperator, LocalTerm};
pub use network::{random_isometry, BinaryTree, Leg, Node, NodeData, TreeNetwork};
pub use sweep::{
    covering_node, dmrg, exact_energy, expectation, is_classical, optimize_center, sweep_schedule, sweep_with,
    DmrgReport, SweepOptions,
};
