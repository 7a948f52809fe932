//! Digital dynamical decoupling: a pure circuit-level technique that fills
//! idle windows with identity-equivalent pulse sequences before execution.
//! No post-processing is applied.

use super::MitigatedResult;
use crate::circuit::{DddSequence, QuantumCircuit};
use crate::error::Result;
use crate::simulator::CircuitExecutor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DddConfig {
    pub sequence: DddSequence,
}

impl Default for DddConfig {
    fn default() -> Self {
        Self {
            sequence: DddSequence::Xx,
        }
    }
}

pub fn ddd_expectation(
    circuit: &QuantumCircuit,
    config: &DddConfig,
    executor: &dyn CircuitExecutor,
    seed: u64,
) -> Result<MitigatedResult> {
    let decoupled = circuit.insert_ddd(config.sequence);
    executor
        .expectation(&decoupled, seed)
        .map(MitigatedResult::unclamped)
}
