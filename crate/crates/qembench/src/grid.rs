//! Grid expansion: cartesian product of noise kinds, levels, mitigations,
//! and repetitions, with the PEC-depolarizing restriction applied and a
//! deterministic per-run seed assignment.

use qem_core::mitigation::MitigationPlan;
use qem_core::noise::NoiseChannelKind;

use crate::config::BenchConfig;

/// One run: a (configuration, repetition) pair with its derived seed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Position in the deterministic expansion order.
    pub ordinal: usize,
    pub config_id: String,
    pub noise_kind: NoiseChannelKind,
    pub p: f64,
    pub mitigation: MitigationPlan,
    pub repetition: usize,
    pub seed: u64,
}

pub fn config_id(kind: NoiseChannelKind, p: f64, mitigation: &MitigationPlan) -> String {
    format!("{}-p{}-{}", kind.as_str(), p, mitigation.kind_str())
}

/// Expand in (noise kind, level, mitigation, repetition) order. PEC cells
/// are emitted only under depolarizing noise; the count over the default
/// grid is 5 x 8 x 3 + 8 = 128 configurations, three repetitions each.
pub fn expand_grid(config: &BenchConfig) -> Vec<RunConfig> {
    let mut runs = Vec::new();
    let mut ordinal = 0usize;
    for &kind in &config.noise_kinds {
        for &p in &config.noise_levels {
            for mitigation in &config.mitigations {
                if matches!(mitigation, MitigationPlan::Pec { .. })
                    && kind != NoiseChannelKind::Depolarizing
                {
                    continue;
                }
                for repetition in 0..config.repetitions {
                    runs.push(RunConfig {
                        ordinal,
                        config_id: config_id(kind, p, mitigation),
                        noise_kind: kind,
                        p,
                        mitigation: mitigation.clone(),
                        repetition,
                        seed: config.base_seed + ordinal as u64,
                    });
                    ordinal += 1;
                }
            }
        }
    }
    runs
}

/// Number of distinct configurations (ignoring repetitions).
pub fn config_count(runs: &[RunConfig]) -> usize {
    let mut ids: Vec<&str> = runs.iter().map(|r| r.config_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}
