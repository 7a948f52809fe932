//! Benchmark harness library: experiment configuration, grid expansion,
//! parallel execution with resumable persistence, aggregation, and figures.
//! The `qembench` binary is a thin CLI over these modules.

pub mod config;
pub mod fetch;
pub mod grid;
pub mod plot;
pub mod records;
pub mod runner;
pub mod summary;
