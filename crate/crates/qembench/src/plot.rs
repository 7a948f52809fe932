//! Minimal SVG line charts: validation accuracy versus noise level, one
//! figure per noise kind with one series per mitigation, plus a
//! baseline-only overview across all kinds. `--data-only` writes the
//! per-figure CSV instead of drawing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qem_core::noise::NoiseChannelKind;

use crate::records::ExperimentRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// (series label -> level -> mean final validation accuracy)
type SeriesMap = BTreeMap<String, BTreeMap<String, (f64, usize)>>;

fn mean_series<'a>(
    records: impl Iterator<Item = &'a ExperimentRecord>,
    label: impl Fn(&ExperimentRecord) -> String,
) -> SeriesMap {
    let mut acc: SeriesMap = BTreeMap::new();
    for r in records {
        if let Some(v) = r.final_val_acc {
            let entry = acc
                .entry(label(r))
                .or_default()
                .entry(r.p.to_string())
                .or_insert((0.0, 0));
            entry.0 += v;
            entry.1 += 1;
        }
    }
    acc
}

fn svg_chart(title: &str, levels: &[f64], series: &[(String, Vec<Option<f64>>)]) -> String {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_at = |i: usize| {
        if levels.len() <= 1 {
            MARGIN_L + plot_w / 2.0
        } else {
            MARGIN_L + plot_w * i as f64 / (levels.len() - 1) as f64
        }
    };
    let y_at = |v: f64| MARGIN_T + plot_h * (1.0 - v);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"#,
        MARGIN_L + plot_w / 2.0
    );
    // Axes
    let _ = write!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{}" stroke="black"/>"#,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h,
        MARGIN_T + plot_h
    );
    // Y ticks at 0, 0.25, ..., 1
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = y_at(v);
        let _ = write!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{MARGIN_L}" y2="{y}" stroke="black"/><text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.2}</text><line x1="{MARGIN_L}" y1="{y}" x2="{}" y2="{y}" stroke="lightgray" stroke-dasharray="3,3"/>"#,
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            y + 4.0,
            MARGIN_L + plot_w
        );
    }
    // X ticks: one per level, categorical spacing
    for (i, p) in levels.iter().enumerate() {
        let x = x_at(i);
        let _ = write!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{p}</text>"#,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0,
            MARGIN_T + plot_h + 20.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">noise probability p</text><text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">validation accuracy</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
    // Series
    for (s, (label, values)) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{:.2},{:.2}", x_at(i), y_at(v))))
            .collect();
        if points.len() > 1 {
            let _ = write!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                points.join(" ")
            );
        }
        for point in &points {
            let mut split = point.split(',');
            let (x, y) = (split.next().unwrap(), split.next().unwrap());
            let _ = write!(svg, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        // Legend
        let ly = MARGIN_T + 16.0 * s as f64;
        let _ = write!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="3" fill="{color}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{label}</text>"#,
            WIDTH - MARGIN_R + 10.0,
            ly,
            WIDTH - MARGIN_R + 28.0,
            ly + 5.0
        );
    }
    svg.push_str("</svg>");
    svg
}

fn figure_rows(levels: &[f64], series: &[(String, Vec<Option<f64>>)]) -> String {
    let mut csv = String::from("series,p,val_accuracy\n");
    for (label, values) in series {
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                let _ = writeln!(csv, "{label},{},{v}", levels[i]);
            }
        }
    }
    csv
}

/// Emit one figure per noise kind plus the baseline overview. Returns the
/// list of files written.
pub fn plot(
    records: &[ExperimentRecord],
    dir: &Path,
    data_only: bool,
) -> anyhow::Result<Vec<String>> {
    if records.iter().all(|r| r.final_val_acc.is_none()) {
        anyhow::bail!("no records with accuracies to plot");
    }
    std::fs::create_dir_all(dir)?;
    let mut levels: Vec<f64> = records.iter().map(|r| r.p).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();

    let mut written = Vec::new();
    let mut emit = |name: &str, title: &str, series: &[(String, Vec<Option<f64>>)],
                    levels: &[f64]|
     -> anyhow::Result<()> {
        if data_only {
            let path = format!("{name}.csv");
            std::fs::write(dir.join(&path), figure_rows(levels, series))?;
            written.push(path);
        } else {
            let path = format!("{name}.svg");
            std::fs::write(dir.join(&path), svg_chart(title, levels, series))?;
            written.push(path);
        }
        Ok(())
    };

    // Per-kind figures: one series per mitigation.
    let mut kinds: Vec<NoiseChannelKind> = records.iter().map(|r| r.noise_kind).collect();
    kinds.sort_by_key(|k| k.as_str());
    kinds.dedup();
    for kind in &kinds {
        let by_mitigation = mean_series(
            records.iter().filter(|r| r.noise_kind == *kind),
            |r| r.mitigation.kind_str().to_string(),
        );
        if by_mitigation.is_empty() {
            continue;
        }
        let mut series: Vec<(String, Vec<Option<f64>>)> = by_mitigation
            .into_iter()
            .map(|(label, points)| {
                let values = levels
                    .iter()
                    .map(|p| points.get(&p.to_string()).map(|(sum, n)| sum / *n as f64))
                    .collect();
                (label, values)
            })
            .collect();
        series.sort_by_key(|(label, _)| (label != "none", label.clone()));
        emit(
            &format!("accuracy_{}", kind.as_str()),
            &format!("Validation accuracy vs noise level: {}", kind.as_str()),
            &series,
            &levels,
        )?;
    }

    // Baseline overview: one series per kind, no mitigation.
    let baseline = mean_series(
        records.iter().filter(|r| r.mitigation.kind_str() == "none"),
        |r| r.noise_kind.as_str().to_string(),
    );
    if !baseline.is_empty() {
        let series: Vec<(String, Vec<Option<f64>>)> = baseline
            .into_iter()
            .map(|(label, points)| {
                let values = levels
                    .iter()
                    .map(|p| points.get(&p.to_string()).map(|(sum, n)| sum / *n as f64))
                    .collect();
                (label, values)
            })
            .collect();
        emit(
            "accuracy_baseline",
            "Baseline validation accuracy without mitigation",
            &series,
            &levels,
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qem_core::mitigation::MitigationPlan;

    fn record(kind: NoiseChannelKind, p: f64, mitigation: MitigationPlan, acc: f64) -> ExperimentRecord {
        ExperimentRecord {
            ordinal: 0,
            config_id: "x".into(),
            noise_kind: kind,
            p,
            mitigation,
            repetition: 0,
            seed: 0,
            epochs: vec![],
            final_train_acc: Some(acc),
            final_val_acc: Some(acc),
            total_wall_time_s: 0.0,
            eval_count: 0,
            overhead_factor: 1.0,
            status: vec![],
        }
    }

    #[test]
    fn baseline_overview_has_one_series_per_kind() {
        let dir = std::env::temp_dir().join(format!("qembench_plot_{}", std::process::id()));
        let mut records = Vec::new();
        for kind in NoiseChannelKind::ALL {
            for p in [0.0, 0.1, 1.0] {
                records.push(record(kind, p, MitigationPlan::None, 0.9));
            }
        }
        let written = plot(&records, &dir, false).unwrap();
        assert!(written.contains(&"accuracy_baseline.svg".to_string()));
        let svg = std::fs::read_to_string(dir.join("accuracy_baseline.svg")).unwrap();
        for kind in NoiseChannelKind::ALL {
            assert!(svg.contains(kind.as_str()), "{kind} missing from legend");
        }
        // One polyline per kind, three points each.
        assert_eq!(svg.matches("<polyline").count(), 5);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn series_point_count_equals_levels_run() {
        let dir = std::env::temp_dir().join(format!("qembench_plot2_{}", std::process::id()));
        let mut records = Vec::new();
        for p in [0.0, 0.05, 0.2, 1.0] {
            records.push(record(NoiseChannelKind::BitFlip, p, MitigationPlan::None, 0.8));
        }
        let written = plot(&records, &dir, true).unwrap();
        assert!(written.contains(&"accuracy_bit_flip.csv".to_string()));
        let csv = std::fs::read_to_string(dir.join("accuracy_bit_flip.csv")).unwrap();
        assert_eq!(csv.lines().count() - 1, 4);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_record_set_is_an_error() {
        let dir = std::env::temp_dir().join("qembench_plot_none");
        assert!(plot(&[], &dir, false).is_err());
    }
}
