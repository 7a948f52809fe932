//! Results persistence: an append-only newline-delimited JSON store plus a
//! derived CSV, ordered deterministically for diff-friendly comparisons.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qem_core::mitigation::MitigationPlan;
use qem_core::model::Metrics;
use qem_core::noise::NoiseChannelKind;

pub const RESULTS_NDJSON: &str = "results.ndjson";
pub const RESULTS_CSV: &str = "results.csv";

/// CSV header, fixed column order.
pub const CSV_HEADER: &str = "config_id,noise_kind,p,mitigation,repetition,seed,epoch,train_acc,val_acc,train_loss,val_loss,wall_time_s,eval_count,status";

/// One (configuration, repetition) run's persisted outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub ordinal: usize,
    pub config_id: String,
    pub noise_kind: NoiseChannelKind,
    pub p: f64,
    pub mitigation: MitigationPlan,
    pub repetition: usize,
    pub seed: u64,
    pub epochs: Vec<Metrics>,
    pub final_train_acc: Option<f64>,
    pub final_val_acc: Option<f64>,
    pub total_wall_time_s: f64,
    pub eval_count: u64,
    /// Mitigated circuit-evaluation count divided by the count an
    /// unmitigated run of the same protocol would use.
    pub overhead_factor: f64,
    /// Status flags: pec_not_representable, zne_clamped, pec_clamped,
    /// lre_clamped, failed:<message>.
    pub status: Vec<String>,
}

impl ExperimentRecord {
    pub fn is_failure(&self) -> bool {
        self.status.iter().any(|s| s.starts_with("failed:"))
    }

    pub fn key(&self) -> (String, usize) {
        (self.config_id.clone(), self.repetition)
    }
}

/// Append one record as a JSON line, flushing immediately so interrupted
/// grids can resume.
pub fn append_record(file: &mut std::fs::File, record: &ExperimentRecord) -> anyhow::Result<()> {
    let line = serde_json::to_string(record)?;
    writeln!(file, "{line}")?;
    file.flush()?;
    Ok(())
}

pub fn load_records(dir: &Path) -> anyhow::Result<Vec<ExperimentRecord>> {
    let path = dir.join(RESULTS_NDJSON);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(&path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ExperimentRecord = serde_json::from_str(line)
            .map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), i + 1))?;
        records.push(record);
    }
    Ok(records)
}

/// Records sorted into expansion order, the canonical order for the CSV and
/// all aggregation.
pub fn sorted(mut records: Vec<ExperimentRecord>) -> Vec<ExperimentRecord> {
    records.sort_by_key(|r| r.ordinal);
    records
}


/// Derive the per-epoch CSV from the record store. Runs without epochs
/// (e.g. pec_not_representable) emit a single row with empty metric fields.
pub fn write_csv(dir: &Path, records: &[ExperimentRecord]) -> anyhow::Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let status = r.status.join(";");
        let prefix = format!(
            "{},{},{},{},{},{}",
            r.config_id,
            r.noise_kind.as_str(),
            r.p,
            r.mitigation.kind_str(),
            r.repetition,
            r.seed
        );
        if r.epochs.is_empty() {
            out.push_str(&format!("{prefix},,,,,,,0,{status}\n"));
            continue;
        }
        for m in &r.epochs {
            out.push_str(&format!(
                "{prefix},{},{},{},{},{},{},{},{}\n",
                m.epoch,
                m.train_accuracy,
                m.val_accuracy,
                m.train_loss,
                m.val_loss,
                m.wall_time_s,
                m.eval_count,
                status
            ));
        }
    }
    std::fs::write(dir.join(RESULTS_CSV), out)?;
    Ok(())
}
