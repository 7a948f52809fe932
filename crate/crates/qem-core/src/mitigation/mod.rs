//! Error-mitigation techniques, each a wrapper that transforms circuits
//! and/or post-processes executor outputs to estimate noise-free
//! expectation values.
//!
//! All techniques operate at the expectation-value layer around a
//! [`CircuitExecutor`], so the training loop treats them uniformly.

mod ddd;
mod lre;
mod pec;
mod zne;

pub use ddd::{ddd_expectation, DddConfig};
pub use lre::{lre_expectation, LreConfig};
pub use pec::{pec_expectation, pec_representation, PecConfig, PecRepresentation};
pub use zne::{zne_expectation, Extrapolation, ZneConfig};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::circuit::{DddSequence, QuantumCircuit};
use crate::error::{Error, Result};
use crate::noise::NoiseChannelKind;
use crate::simulator::{CircuitExecutor, DensityExecutor, ExpectationResult};

/// Expectation values after mitigation, with a flag recording whether any
/// value fell outside [-1, 1] and was clamped before being handed on.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigatedResult {
    pub result: ExpectationResult,
    pub clamped: bool,
}

impl MitigatedResult {
    fn unclamped(result: ExpectationResult) -> Self {
        Self {
            result,
            clamped: false,
        }
    }
}

/// Clamp extrapolated/estimated values into the physical range; the
/// classifier head must never see an unphysical expectation.
fn clamp_values(values: &mut [f64]) -> bool {
    let mut clamped = false;
    for v in values.iter_mut() {
        if *v > 1.0 || *v < -1.0 {
            *v = v.clamp(-1.0, 1.0);
            clamped = true;
        }
    }
    clamped
}

fn default_zne_scales() -> Vec<u32> {
    vec![1, 3, 5]
}

fn default_pec_samples() -> u32 {
    200
}

fn default_lre_degree() -> u32 {
    2
}

fn default_lre_multiplier() -> u32 {
    3
}

fn default_ddd_sequence() -> DddSequence {
    DddSequence::Xx
}

/// Tagged mitigation selection with technique-specific settings, as it
/// appears under the `mitigation` object of an experiment config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MitigationPlan {
    None,
    Zne {
        #[serde(default = "default_zne_scales")]
        scale_factors: Vec<u32>,
        #[serde(default)]
        extrapolation: Extrapolation,
    },
    Pec {
        #[serde(default = "default_pec_samples")]
        num_samples: u32,
    },
    Ddd {
        #[serde(default = "default_ddd_sequence")]
        sequence: DddSequence,
    },
    Lre {
        #[serde(default = "default_lre_degree")]
        degree: u32,
        #[serde(default = "default_lre_multiplier")]
        fold_multiplier: u32,
    },
}

impl MitigationPlan {
    pub fn zne_default() -> Self {
        MitigationPlan::Zne {
            scale_factors: default_zne_scales(),
            extrapolation: Extrapolation::Richardson,
        }
    }

    pub fn pec_default() -> Self {
        MitigationPlan::Pec {
            num_samples: default_pec_samples(),
        }
    }

    pub fn ddd_default() -> Self {
        MitigationPlan::Ddd {
            sequence: default_ddd_sequence(),
        }
    }

    pub fn lre_default() -> Self {
        MitigationPlan::Lre {
            degree: default_lre_degree(),
            fold_multiplier: default_lre_multiplier(),
        }
    }

    /// The serialized kind name: none, zne, pec, ddd, lre.
    pub fn kind_str(&self) -> &'static str {
        match self {
            MitigationPlan::None => "none",
            MitigationPlan::Zne { .. } => "zne",
            MitigationPlan::Pec { .. } => "pec",
            MitigationPlan::Ddd { .. } => "ddd",
            MitigationPlan::Lre { .. } => "lre",
        }
    }
}

/// A [`CircuitExecutor`] with a mitigation plan applied around it: the
/// uniform interface the training loop consumes. Tracks how often results
/// had to be clamped into [-1, 1].
#[derive(Debug)]
pub struct MitigatedExecutor {
    plan: MitigationPlan,
    inner: DensityExecutor,
    /// Moment-group boundaries of the circuits this executor will see;
    /// used by layerwise folding. A single group when empty circuits vary.
    lre_groups: Vec<usize>,
    pec: Option<PecConfig>,
    clamp_events: AtomicU64,
}

impl MitigatedExecutor {
    /// Validates the plan against the executor's noise model. PEC is only
    /// representable for depolarizing noise with p < 3/4.
    pub fn new(plan: MitigationPlan, inner: DensityExecutor, lre_groups: Vec<usize>) -> Result<Self> {
        let pec = match &plan {
            MitigationPlan::Pec { num_samples } => {
                let channel = &inner.noise.channel;
                if channel.kind() != NoiseChannelKind::Depolarizing {
                    return Err(Error::InvalidConfig(format!(
                        "pec requires depolarizing noise, got {}",
                        channel.kind()
                    )));
                }
                Some(PecConfig::new(
                    pec_representation(channel.p())?,
                    *num_samples,
                ))
            }
            _ => None,
        };
        Ok(Self {
            plan,
            inner,
            lre_groups: if lre_groups.is_empty() {
                vec![0]
            } else {
                lre_groups
            },
            pec,
            clamp_events: AtomicU64::new(0),
        })
    }

    pub fn plan(&self) -> &MitigationPlan {
        &self.plan
    }

    /// The unmitigated executor, for gradient ablations.
    pub fn raw(&self) -> &DensityExecutor {
        &self.inner
    }

    /// How many expectation evaluations produced at least one clamped value.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }

    fn dispatch(&self, circuit: &QuantumCircuit, seed: u64) -> Result<MitigatedResult> {
        match &self.plan {
            MitigationPlan::None => self
                .inner
                .expectation(circuit, seed)
                .map(MitigatedResult::unclamped),
            MitigationPlan::Zne {
                scale_factors,
                extrapolation,
            } => {
                let config = ZneConfig {
                    scale_factors: scale_factors.clone(),
                    extrapolation: *extrapolation,
                };
                zne_expectation(circuit, &config, &self.inner, seed)
            }
            MitigationPlan::Pec { .. } => {
                let config = self.pec.as_ref().expect("validated at construction");
                pec_expectation(circuit, config, &self.inner, seed)
            }
            MitigationPlan::Ddd { sequence } => ddd_expectation(
                circuit,
                &DddConfig {
                    sequence: *sequence,
                },
                &self.inner,
                seed,
            ),
            MitigationPlan::Lre {
                degree,
                fold_multiplier,
            } => {
                let config = LreConfig {
                    degree: *degree,
                    fold_multiplier: *fold_multiplier,
                    groups: self.lre_groups.clone(),
                };
                lre_expectation(circuit, &config, &self.inner, seed)
            }
        }
    }
}

impl CircuitExecutor for MitigatedExecutor {
    fn expectation(&self, circuit: &QuantumCircuit, seed: u64) -> Result<ExpectationResult> {
        let mitigated = self.dispatch(circuit, seed)?;
        if mitigated.clamped {
            self.clamp_events.fetch_add(1, Ordering::Relaxed);
        }
        Ok(mitigated.result)
    }

    fn eval_count(&self) -> u64 {
        self.inner.eval_count()
    }
}
