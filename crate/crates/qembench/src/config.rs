//! Experiment configuration file: dataset, grid, mitigation settings, and
//! training-protocol overrides. Every field has a default reproducing the
//! benchmark protocol, so `{}` is a valid config.

use serde::{Deserialize, Serialize};

use qem_core::data::Reduction;
use qem_core::mitigation::MitigationPlan;
use qem_core::noise::NoiseChannelKind;

pub const DEFAULT_NOISE_LEVELS: [f64; 8] = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];

fn default_dataset() -> String {
    "data/iris.csv".into()
}

fn default_noise_kinds() -> Vec<NoiseChannelKind> {
    NoiseChannelKind::ALL.to_vec()
}

fn default_noise_levels() -> Vec<f64> {
    DEFAULT_NOISE_LEVELS.to_vec()
}

fn default_mitigations() -> Vec<MitigationPlan> {
    vec![
        MitigationPlan::zne_default(),
        MitigationPlan::ddd_default(),
        MitigationPlan::lre_default(),
        MitigationPlan::pec_default(),
    ]
}

fn default_repetitions() -> usize {
    3
}

fn default_base_seed() -> u64 {
    22
}

fn default_shots() -> Option<u64> {
    Some(8192)
}

fn default_epochs() -> usize {
    20
}

fn default_lr0() -> f64 {
    0.3
}

fn default_lr_halving_period() -> usize {
    5
}

fn default_batch_size() -> usize {
    5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_dataset")]
    pub dataset: String,
    #[serde(default)]
    pub reduction: Reduction,
    #[serde(default = "default_noise_kinds")]
    pub noise_kinds: Vec<NoiseChannelKind>,
    #[serde(default = "default_noise_levels")]
    pub noise_levels: Vec<f64>,
    #[serde(default = "default_mitigations")]
    pub mitigations: Vec<MitigationPlan>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    /// null for analytic expectations.
    #[serde(default = "default_shots")]
    pub shots: Option<u64>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr0")]
    pub lr0: f64,
    #[serde(default = "default_lr_halving_period")]
    pub lr_halving_period: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_true")]
    pub mitigate_gradients: bool,
    #[serde(default = "default_true")]
    pub head_bias: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl BenchConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: BenchConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.noise_kinds.is_empty() || self.noise_levels.is_empty() {
            anyhow::bail!("noise_kinds and noise_levels must be non-empty");
        }
        for &p in &self.noise_levels {
            if !(0.0..=1.0).contains(&p) {
                anyhow::bail!("noise level {p} outside [0, 1]");
            }
        }
        let mut sorted = self.noise_levels.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        if sorted.len() != self.noise_levels.len() {
            anyhow::bail!("duplicate noise levels");
        }
        if self.repetitions == 0 {
            anyhow::bail!("repetitions must be >= 1");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            anyhow::bail!("epochs and batch_size must be >= 1");
        }
        let wants_pec = self
            .mitigations
            .iter()
            .any(|m| matches!(m, MitigationPlan::Pec { .. }));
        let has_depolarizing = self
            .noise_kinds
            .iter()
            .any(|k| *k == NoiseChannelKind::Depolarizing);
        if wants_pec && !has_depolarizing {
            anyhow::bail!(
                "pec is only defined for depolarizing noise, which is absent from noise_kinds"
            );
        }
        Ok(())
    }
}
