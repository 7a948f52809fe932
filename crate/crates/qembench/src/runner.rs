//! Grid execution: a worker pool runs training configurations in parallel,
//! a single writer appends finished records, and already-recorded
//! (configuration, repetition) pairs are skipped on resume.

use std::collections::HashSet;
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;

use qem_core::data::SplitDataset;
use qem_core::error::Error as CoreError;
use qem_core::mitigation::MitigationPlan;
use qem_core::model::{train, TrainConfig, QUANTUM_PARAMS};
use qem_core::noise::{NoiseChannel, NoiseModel};

use crate::config::BenchConfig;
use crate::grid::RunConfig;
use crate::records::{append_record, ExperimentRecord, RESULTS_NDJSON};

/// Circuit evaluations an unmitigated run of this protocol consumes, the
/// denominator for the overhead factor.
fn baseline_eval_count(config: &BenchConfig, split: &SplitDataset) -> u64 {
    let n_train = split.train_x.len() as u64;
    let n_val = split.val_x.len() as u64;
    let per_sample = 1 + 2 * QUANTUM_PARAMS as u64
        + if split.feature_dim == 4 { 6 } else { 0 };
    config.epochs as u64 * (n_train * per_sample + n_train + n_val)
}

fn execute_run(
    run: &RunConfig,
    bench: &BenchConfig,
    split: &SplitDataset,
    baseline_evals: u64,
) -> ExperimentRecord {
    let mut record = ExperimentRecord {
        ordinal: run.ordinal,
        config_id: run.config_id.clone(),
        noise_kind: run.noise_kind,
        p: run.p,
        mitigation: run.mitigation.clone(),
        repetition: run.repetition,
        seed: run.seed,
        epochs: Vec::new(),
        final_train_acc: None,
        final_val_acc: None,
        total_wall_time_s: 0.0,
        eval_count: 0,
        overhead_factor: 0.0,
        status: Vec::new(),
    };

    let channel = match NoiseChannel::new(run.noise_kind, run.p) {
        Ok(c) => c,
        Err(e) => {
            record.status.push(format!("failed:{e}"));
            return record;
        }
    };
    // Large-gamma PEC representations are valid but statistically expensive.
    if matches!(run.mitigation, MitigationPlan::Pec { .. }) {
        if let Ok(rep) = qem_core::mitigation::pec_representation(run.p) {
            if let Some(warning) = rep.variance_warning() {
                eprintln!("warning: {}: {warning}", run.config_id);
            }
        }
    }
    let train_config = TrainConfig {
        epochs: bench.epochs,
        lr0: bench.lr0,
        lr_halving_period: bench.lr_halving_period,
        batch_size: bench.batch_size,
        repetitions: bench.repetitions,
        seed: run.seed,
        shots: bench.shots,
        noise: NoiseModel::new(channel),
        mitigation: run.mitigation.clone(),
        mitigate_gradients: bench.mitigate_gradients,
        head_bias: bench.head_bias,
    };

    match train(split, &train_config) {
        Ok(outcome) => {
            record.final_train_acc = outcome.metrics.last().map(|m| m.train_accuracy);
            record.final_val_acc = outcome.metrics.last().map(|m| m.val_accuracy);
            record.total_wall_time_s = outcome.metrics.iter().map(|m| m.wall_time_s).sum();
            record.eval_count = outcome.eval_count;
            record.overhead_factor = outcome.eval_count as f64 / baseline_evals as f64;
            record.epochs = outcome.metrics;
            if outcome.clamp_events > 0 {
                record
                    .status
                    .push(format!("{}_clamped", run.mitigation.kind_str()));
            }
        }
        Err(CoreError::NotRepresentable(p)) => {
            record.status.push("pec_not_representable".into());
            record.status.push(format!("p={p}"));
        }
        Err(e) => record.status.push(format!("failed:{e}")),
    }
    record
}

/// Run all configurations not already present in the store. Returns the
/// complete record set (existing plus new) and whether failures occurred.
pub fn run_grid(
    runs: &[RunConfig],
    bench: &BenchConfig,
    split: &SplitDataset,
    out_dir: &Path,
    parallelism: usize,
    existing: Vec<ExperimentRecord>,
) -> anyhow::Result<(Vec<ExperimentRecord>, bool)> {
    std::fs::create_dir_all(out_dir)?;
    let done: HashSet<(String, usize)> = existing.iter().map(ExperimentRecord::key).collect();
    let pending: Vec<&RunConfig> = runs
        .iter()
        .filter(|r| !done.contains(&(r.config_id.clone(), r.repetition)))
        .collect();
    eprintln!(
        "grid: {} runs total, {} already recorded, {} to execute (parallelism {})",
        runs.len(),
        done.len(),
        pending.len(),
        parallelism
    );

    let baseline_evals = baseline_eval_count(bench, split);
    let mut store = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_dir.join(RESULTS_NDJSON))?;

    let (sender, receiver) = mpsc::channel::<ExperimentRecord>();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()?;

    let mut records = existing;
    let total = pending.len();
    std::thread::scope(|scope| -> anyhow::Result<()> {
        let writer = scope.spawn(move || -> anyhow::Result<Vec<ExperimentRecord>> {
            let mut new_records = Vec::new();
            let mut finished = 0usize;
            while let Ok(record) = receiver.recv() {
                append_record(&mut store, &record)?;
                finished += 1;
                eprintln!(
                    "[{finished}/{total}] {} rep {} {} ({:.1}s, {} evals)",
                    record.config_id,
                    record.repetition,
                    if record.is_failure() {
                        "FAILED"
                    } else if record.status.is_empty() {
                        "ok"
                    } else {
                        "ok*"
                    },
                    record.total_wall_time_s,
                    record.eval_count
                );
                new_records.push(record);
            }
            Ok(new_records)
        });

        pool.install(|| {
            pending
                .par_iter()
                .try_for_each_with(sender, |s, run| -> anyhow::Result<()> {
                    let record = execute_run(run, bench, split, baseline_evals);
                    s.send(record)?;
                    Ok(())
                })
        })?;
        // Sender dropped by try_for_each_with; the writer drains and exits.
        let new_records = writer
            .join()
            .map_err(|_| anyhow::anyhow!("writer thread panicked"))??;
        records.extend(new_records);
        Ok(())
    })?;

    let any_failures = records.iter().any(ExperimentRecord::is_failure);
    Ok((records, any_failures))
}
