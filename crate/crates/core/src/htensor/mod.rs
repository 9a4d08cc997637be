//! Hybrid tree tensor networks: quantum tensors, their measurement, and
//! optimization of mixed classical/quantum networks.

pub mod measure;
pub mod hybrid;
pub mod isometrize;
pub mod noise;
pub mod qtensor;
pub mod tomography;
pub mod vqe;

pub use measure::{
    expect_qt, local_diagonalize, pauli_weight, plan_contraction, project_to_unitary, settings_for,
    ContractionOrder, MeasurementPlan,
};
pub use noise::{noisy_expectation, Meter, NoiseModel};
pub use qtensor::QuantumTensor;
pub use tomography::{
    classical_index_contraction, exact_open_link, open_link_contraction, pauli_strings, ClassicalIndexTensor, Fold,
    MeasurementMatrix,
};
pub use vqe::{fold_hamiltonian, loss, loss_and_adjoint, project_all, vqe_optimize, FoldedHamiltonian, Strategy, VqeOptions, VqeReport};
pub use isometrize::{absorb_r, factor_gram, implicit_isometrize, renormalize, GramFactor};
pub use hybrid::{
    add_wrap_gates, circuit_for_state, classical_reference, httn_sweep, hybrid_from_classical, multi_quantum_tree, optimize_quantum_center,
    reinit_from_classical, CircuitInit, HybridOptions, SweepRecord,
};
