//! Statevector simulation of two-qubit gate circuits.

pub mod circuit;
pub mod encode;
pub mod gates;

pub use circuit::{
    apply_block, apply_gate, expect, fidelity, overlap_loss, zero_state, BlockOperator, BlockTerm, Circuit,
    GateSpec, Observable, Topology, MAX_QUBITS,
};
pub use gates::{cartan, cartan_unitary, kak_params, Gate4, PARAMS_PER_GATE};
pub use encode::{encode_state, fit_state, EncodeOptions, Encoded};
