//! Classical and hybrid tree tensor networks for ground-state search.

pub mod consts;
pub mod optim;
pub mod qsim;
pub mod error;
pub mod experiment;
pub mod htensor;
pub mod pauli;
pub mod tensor;
pub mod ttn;

pub use error::{Error, Result};
