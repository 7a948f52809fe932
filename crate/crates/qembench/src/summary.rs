//! Aggregation into the noise-strength interval table: per cell the best
//! (maximum over the interval's levels) final validation accuracy, where
//! each level's value is the mean over repetitions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qem_core::noise::NoiseChannelKind;

use crate::records::ExperimentRecord;

/// Noise-strength intervals over the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Interval {
    Low,
    Medium,
    High,
}

impl Interval {
    pub const ALL: [Interval; 3] = [Interval::Low, Interval::Medium, Interval::High];

    /// Inclusive bounds: Low 0-0.02, Medium 0.05-0.1, High 0.2-1.0.
    pub fn of(p: f64) -> Option<Interval> {
        if (0.0..=0.02).contains(&p) {
            Some(Interval::Low)
        } else if (0.05..=0.1).contains(&p) {
            Some(Interval::Medium)
        } else if (0.2..=1.0).contains(&p) {
            Some(Interval::High)
        } else {
            None
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Interval::Low => "Low",
            Interval::Medium => "Medium",
            Interval::High => "High",
        }
    }
}

/// One aggregated cell.
#[derive(Debug, Clone)]
pub struct SummaryCell {
    pub noise_kind: NoiseChannelKind,
    pub interval: Interval,
    pub mitigation: String,
    /// max over the interval's levels of (mean over repetitions of final
    /// validation accuracy).
    pub accuracy: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SummaryTable {
    pub cells: Vec<SummaryCell>,
    /// (kind, interval, mitigation) combinations requested but absent.
    pub missing: Vec<String>,
}

impl SummaryTable {
    pub fn cell(
        &self,
        kind: NoiseChannelKind,
        interval: Interval,
        mitigation: &str,
    ) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| {
            c.noise_kind == kind && c.interval == interval && c.mitigation == mitigation
        })
    }
}

/// Aggregate records. Records without a final validation accuracy (failed
/// or not-representable runs) are reported as missing, never fabricated.
pub fn summarize(records: &[ExperimentRecord]) -> SummaryTable {
    // (kind, mitigation, p) -> accuracies over repetitions
    let mut per_level: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    let mut kinds: Vec<NoiseChannelKind> = Vec::new();
    let mut mitigations: Vec<String> = Vec::new();
    for r in records {
        if !kinds.contains(&r.noise_kind) {
            kinds.push(r.noise_kind);
        }
        let mit = r.mitigation.kind_str().to_string();
        if !mitigations.contains(&mit) {
            mitigations.push(mit.clone());
        }
        if let Some(acc) = r.final_val_acc {
            per_level
                .entry((r.noise_kind.as_str().into(), mit, r.p.to_string()))
                .or_default()
                .push(acc);
        }
    }

    let mut table = SummaryTable::default();
    for &kind in &kinds {
        for interval in Interval::ALL {
            for mitigation in &mitigations {
                // Mean over repetitions per level, then max over levels.
                let mut best: Option<f64> = None;
                let mut levels = 0usize;
                for ((k, m, p), accs) in &per_level {
                    if k != kind.as_str() || m != mitigation {
                        continue;
                    }
                    let p: f64 = p.parse().unwrap();
                    if Interval::of(p) != Some(interval) {
                        continue;
                    }
                    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
                    levels += 1;
                    best = Some(best.map_or(mean, |b: f64| b.max(mean)));
                }
                match best {
                    Some(accuracy) => table.cells.push(SummaryCell {
                        noise_kind: kind,
                        interval,
                        mitigation: mitigation.clone(),
                        accuracy,
                        levels,
                    }),
                    None => table.missing.push(format!(
                        "{}/{}/{}",
                        kind.as_str(),
                        interval.label(),
                        mitigation
                    )),
                }
            }
        }
    }
    table
}

/// Aligned plain-text table, one row per (noise kind, interval).
pub fn render_text(table: &SummaryTable) -> String {
    let mut mitigations: Vec<String> = table.cells.iter().map(|c| c.mitigation.clone()).collect();
    mitigations.sort();
    mitigations.dedup();
    // Baseline first, then alphabetical.
    mitigations.sort_by_key(|m| (m != "none", m.clone()));

    let mut out = String::new();
    let _ = write!(out, "{:<18} {:<8}", "noise", "interval");
    for m in &mitigations {
        let _ = write!(out, " {m:>8}");
    }
    out.push('\n');
    let mut kinds: Vec<NoiseChannelKind> = table.cells.iter().map(|c| c.noise_kind).collect();
    kinds.dedup();
    for kind in kinds {
        for interval in Interval::ALL {
            let row_exists = mitigations
                .iter()
                .any(|m| table.cell(kind, interval, m).is_some());
            if !row_exists {
                continue;
            }
            let _ = write!(out, "{:<18} {:<8}", kind.as_str(), interval.label());
            for m in &mitigations {
                match table.cell(kind, interval, m) {
                    Some(cell) => {
                        let _ = write!(out, " {:>8.4}", cell.accuracy);
                    }
                    None => {
                        let _ = write!(out, " {:>8}", "---");
                    }
                }
            }
            out.push('\n');
        }
    }
    out.push('\n');
    out.push_str(
        "cell = max over the interval's noise levels of the mean final validation accuracy over repetitions\n",
    );
    out.push_str("intervals: Low 0-0.02, Medium 0.05-0.1, High 0.2-1.0\n");
    if !table.missing.is_empty() {
        let _ = writeln!(out, "missing cells: {}", table.missing.join(", "));
    }
    out
}

/// summary.csv, one row per cell.
pub fn write_summary(dir: &Path, table: &SummaryTable) -> anyhow::Result<()> {
    let mut csv = String::from("noise_kind,interval,mitigation,accuracy,levels\n");
    for c in &table.cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            c.noise_kind.as_str(),
            c.interval.label(),
            c.mitigation,
            c.accuracy,
            c.levels
        );
    }
    std::fs::write(dir.join("summary.csv"), csv)?;
    std::fs::write(dir.join("summary.txt"), render_text(table))?;
    Ok(())
}
