//! Configuration-driven experiments with trace output.

pub mod config;
pub mod run;
pub mod trace;

pub use config::{
    AnsatzConfig, AnsatzKind, CircuitTopology, ExperimentConfig, ModelConfig, ModelKind, NoiseConfig, NoiseScope,
    OptimizerConfig,
};
pub use run::{reference, run, run_realization, RunOptions, REFERENCE_MAX_SITES};
pub use trace::{
    best_of, compare, write_atomic, RealizationSummary, Reference, ReferenceMethod, RunSummary, SweepRow, SweepTrace,
    TraceStatus,
};
