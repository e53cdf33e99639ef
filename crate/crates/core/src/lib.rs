//! Simulation of one-clean-qubit (DQC1) quantum kernels for support vector
//! classification, with classical RBF baselines and an experiment harness.

pub mod circuit;
pub mod cli;
pub mod datasets;
pub mod dqc1;
pub mod error;
pub mod kernel;
pub mod svm;
pub mod tensor;
pub mod util;

pub use error::{Error, Result};
pub use tensor::{Complex, ComplexMatrix};

/// Library version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
