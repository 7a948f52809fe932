//! Core library for benchmarking noise robustness of a hybrid quantum
//! classifier: dense complex linear algebra, a parameterized-circuit IR,
//! single-qubit Kraus noise channels, a noisy density-matrix simulator,
//! four error-mitigation techniques (ZNE, PEC, DDD, LRE), the hybrid
//! quantum/classical Iris classifier, and the data pipeline feeding it.

pub mod circuit;
pub mod complex;
pub mod data;
pub mod error;
pub mod mitigation;
pub mod model;
pub mod noise;
pub mod seeding;
pub mod simulator;

pub use complex::{Complex64, ComplexMatrix};
pub use error::{Error, Result};
