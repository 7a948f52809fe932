//! Iris ingestion, label encoding, standardization, feature reduction, and
//! the stratified 75/25 split.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_FEATURES: usize = 4;
pub const N_CLASSES: usize = 3;

/// The raw dataset: four numeric features per sample plus an encoded label.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Vec<[f64; N_FEATURES]>,
    pub labels: Vec<usize>,
    /// Class names sorted alphabetically; the label encoding follows this order.
    pub class_names: Vec<String>,
}

/// How the four features are reduced to the three embedding angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Keep standardized columns 0..3 (sepal length, sepal width, petal
    /// length), dropping petal width.
    #[default]
    Truncate3,
    /// Keep all four standardized features; a trainable 4->3 linear layer in
    /// the model performs the reduction.
    TrainableCompress,
}

/// Stratified split with train-fitted standardization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<usize>,
    pub val_x: Vec<Vec<f64>>,
    pub val_y: Vec<usize>,
    /// Per-column mean of the raw training features (all four columns).
    pub scaler_mean: Vec<f64>,
    /// Per-column standard deviation of the raw training features.
    pub scaler_std: Vec<f64>,
    /// Original row indices of each split, for exact reproduction.
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub reduction: Reduction,
    /// 3 for Truncate3, 4 for TrainableCompress.
    pub feature_dim: usize,
}

impl SplitDataset {
    /// JSON manifest of the split membership.
    pub fn manifest_json(&self) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            train_indices: &'a [usize],
            val_indices: &'a [usize],
            reduction: Reduction,
        }
        serde_json::to_string_pretty(&Manifest {
            train_indices: &self.train_indices,
            val_indices: &self.val_indices,
            reduction: self.reduction,
        })
        .expect("manifest serialize")
    }
}

/// Parse an Iris CSV: four numeric columns plus a species column, header
/// optional, comma separated, dot decimal. Species names map alphabetically
/// to label indices (setosa 0, versicolor 1, virginica 2 for the canonical
/// file); an `Iris-` prefix is stripped for compatibility with the UCI file.
pub fn load_iris(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let path_str = path.display().to_string();

    let mut features = Vec::new();
    let mut species = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != N_FEATURES + 1 {
            // A header row is allowed only at the top.
            return Err(Error::DataFormat {
                path: path_str,
                line: line_no,
                message: format!(
                    "expected 5 comma-separated columns (sepal_length,sepal_width,petal_length,petal_width,species), got {}",
                    fields.len()
                ),
            });
        }
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header
        }
        let mut row = [0.0; N_FEATURES];
        for (j, value) in fields[..N_FEATURES].iter().enumerate() {
            row[j] = value.parse::<f64>().map_err(|_| Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                message: format!("column {} is not a number: {value:?}", j + 1),
            })?;
        }
        features.push(row);
        let name = fields[N_FEATURES]
            .trim_start_matches("Iris-")
            .to_ascii_lowercase();
        species.push(name);
    }

    let mut class_names: Vec<String> = species.clone();
    class_names.sort();
    class_names.dedup();
    if class_names.len() != N_CLASSES {
        return Err(Error::DataFormat {
            path: path_str,
            line: 0,
            message: format!(
                "expected {} species, found {}: {:?}",
                N_CLASSES,
                class_names.len(),
                class_names
            ),
        });
    }
    let labels = species
        .iter()
        .map(|s| class_names.iter().position(|c| c == s).unwrap())
        .collect();
    Ok(Dataset {
        features,
        labels,
        class_names,
    })
}

/// Stratified 75/25 shuffle-split (floor on the train side), standardization
/// fitted on the training portion only, then feature reduction.
pub fn prepare(dataset: &Dataset, seed: u64, reduction: Reduction) -> SplitDataset {
    let n = dataset.features.len();
    let n_train_total = n * 3 / 4;

    // Per-class index pools, shuffled independently.
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); N_CLASSES];
    for (i, &label) in dataset.labels.iter().enumerate() {
        by_class[label].push(i);
    }
    for (c, pool) in by_class.iter_mut().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(crate::seeding::derive(seed, c as u64));
        for i in (1..pool.len()).rev() {
            pool.swap(i, rng.gen_range(0..=i));
        }
    }

    // Largest-remainder quotas, ties broken by class index, so per-class
    // counts stay within one sample of exact proportionality.
    let mut quotas: Vec<usize> = by_class.iter().map(|p| p.len() * 3 / 4).collect();
    let mut assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..N_CLASSES).collect();
    order.sort_by(|&a, &b| {
        let ra = by_class[a].len() * 3 % 4;
        let rb = by_class[b].len() * 3 % 4;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if assigned >= n_train_total {
            break;
        }
        if quotas[c] < by_class[c].len() {
            quotas[c] += 1;
            assigned += 1;
        }
    }

    let mut train_indices = Vec::with_capacity(n_train_total);
    let mut val_indices = Vec::with_capacity(n - n_train_total);
    for (c, pool) in by_class.iter().enumerate() {
        train_indices.extend_from_slice(&pool[..quotas[c]]);
        val_indices.extend_from_slice(&pool[quotas[c]..]);
    }

    // Standardization statistics from the training rows only.
    let mut mean = vec![0.0; N_FEATURES];
    for &i in &train_indices {
        for (j, m) in mean.iter_mut().enumerate() {
            *m += dataset.features[i][j];
        }
    }
    for m in &mut mean {
        *m /= train_indices.len() as f64;
    }
    let mut std = vec![0.0; N_FEATURES];
    for &i in &train_indices {
        for (j, s) in std.iter_mut().enumerate() {
            let d = dataset.features[i][j] - mean[j];
            *s += d * d;
        }
    }
    for s in &mut std {
        *s = (*s / train_indices.len() as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }

    let feature_dim = match reduction {
        Reduction::Truncate3 => 3,
        Reduction::TrainableCompress => 4,
    };
    let standardize = |i: usize| -> Vec<f64> {
        (0..feature_dim)
            .map(|j| (dataset.features[i][j] - mean[j]) / std[j])
            .collect()
    };

    SplitDataset {
        train_x: train_indices.iter().map(|&i| standardize(i)).collect(),
        train_y: train_indices.iter().map(|&i| dataset.labels[i]).collect(),
        val_x: val_indices.iter().map(|&i| standardize(i)).collect(),
        val_y: val_indices.iter().map(|&i| dataset.labels[i]).collect(),
        scaler_mean: mean,
        scaler_std: std,
        train_indices,
        val_indices,
        reduction,
        feature_dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn iris_path() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
    }

    fn canonical() -> Dataset {
        load_iris(iris_path()).unwrap()
    }

    #[test]
    fn canonical_file_loads_150_rows_50_per_class() {
        let d = canonical();
        assert_eq!(d.features.len(), 150);
        for c in 0..3 {
            assert_eq!(d.labels.iter().filter(|&&l| l == c).count(), 50);
        }
        assert_eq!(d.class_names, vec!["setosa", "versicolor", "virginica"]);
    }

    #[test]
    fn first_row_parses_as_expected() {
        let d = canonical();
        assert_eq!(d.features[0], [5.1, 3.5, 1.4, 0.2]);
        assert_eq!(d.labels[0], 0);
    }

    #[test]
    fn wrong_column_count_names_file_and_schema() {
        let mut tmp = std::env::temp_dir();
        tmp.push(format!("iris_bad_{}.csv", std::process::id()));
        let mut f = std::fs::File::create(&tmp).unwrap();
        writeln!(f, "1.0,2.0,3.0").unwrap();
        let err = load_iris(&tmp).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("iris_bad"), "{msg}");
        assert!(msg.contains("sepal_length"), "{msg}");
        std::fs::remove_file(&tmp).ok();
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let mut tmp = std::env::temp_dir();
        tmp.push(format!("iris_bad_row_{}.csv", std::process::id()));
        let mut f = std::fs::File::create(&tmp).unwrap();
        writeln!(f, "5.1,3.5,1.4,0.2,setosa").unwrap();
        writeln!(f, "5.1,oops,1.4,0.2,setosa").unwrap();
        let err = load_iris(&tmp).unwrap_err();
        assert!(matches!(err, Error::DataFormat { line: 2, .. }), "{err}");
        std::fs::remove_file(&tmp).ok();
    }

    #[test]
    fn split_sizes_are_112_and_38() {
        let split = prepare(&canonical(), 7, Reduction::Truncate3);
        assert_eq!(split.train_x.len(), 112);
        assert_eq!(split.val_x.len(), 38);
        assert_eq!(split.feature_dim, 3);
        assert_eq!(split.train_x[0].len(), 3);
    }

    #[test]
    fn split_is_stratified_within_one_sample() {
        let split = prepare(&canonical(), 3, Reduction::Truncate3);
        let mut val_counts = [0usize; 3];
        for &y in &split.val_y {
            val_counts[y] += 1;
        }
        let mut sorted = val_counts;
        sorted.sort_unstable();
        assert_eq!(sorted, [12, 13, 13], "val counts {val_counts:?}");
    }

    #[test]
    fn standardized_train_columns_have_zero_mean_unit_std() {
        let split = prepare(&canonical(), 11, Reduction::Truncate3);
        for j in 0..3 {
            let column: Vec<f64> = split.train_x.iter().map(|r| r[j]).collect();
            let mean: f64 = column.iter().sum::<f64>() / column.len() as f64;
            let var: f64 =
                column.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / column.len() as f64;
            assert!(mean.abs() < 1e-9, "col {j} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "col {j} std {}", var.sqrt());
        }
    }

    #[test]
    fn scaler_round_trip_recovers_raw_features() {
        let d = canonical();
        let split = prepare(&d, 5, Reduction::Truncate3);
        for (row, &orig_idx) in split.train_x.iter().zip(&split.train_indices) {
            for j in 0..3 {
                let restored = row[j] * split.scaler_std[j] + split.scaler_mean[j];
                assert!((restored - d.features[orig_idx][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scaler_is_fit_on_train_only() {
        // Refitting on all 150 rows must change the statistics.
        let d = canonical();
        let split = prepare(&d, 5, Reduction::Truncate3);
        let mut full_mean = vec![0.0; 4];
        for row in &d.features {
            for (j, m) in full_mean.iter_mut().enumerate() {
                *m += row[j];
            }
        }
        for m in &mut full_mean {
            *m /= d.features.len() as f64;
        }
        let differs = (0..4).any(|j| (full_mean[j] - split.scaler_mean[j]).abs() > 1e-12);
        assert!(differs, "train-only scaler matched the full-data scaler");
    }

    #[test]
    fn same_seed_reproduces_membership_different_seed_changes_it() {
        let d = canonical();
        let a = prepare(&d, 21, Reduction::Truncate3);
        let b = prepare(&d, 21, Reduction::Truncate3);
        assert_eq!(a.train_indices, b.train_indices);
        assert_eq!(a.val_indices, b.val_indices);
        let c = prepare(&d, 22, Reduction::Truncate3);
        assert_ne!(a.train_indices, c.train_indices);
    }

    #[test]
    fn label_encoding_is_a_bijection() {
        let d = canonical();
        for (name, label) in [("setosa", 0), ("versicolor", 1), ("virginica", 2)] {
            assert_eq!(d.class_names[label], name);
        }
    }

    #[test]
    fn trainable_compress_keeps_four_features() {
        let split = prepare(&canonical(), 7, Reduction::TrainableCompress);
        assert_eq!(split.feature_dim, 4);
        assert_eq!(split.train_x[0].len(), 4);
    }

    #[test]
    fn manifest_round_trips_membership() {
        let split = prepare(&canonical(), 13, Reduction::Truncate3);
        let manifest = split.manifest_json();
        let value: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        assert_eq!(value["train_indices"].as_array().unwrap().len(), 112);
        assert_eq!(value["val_indices"].as_array().unwrap().len(), 38);
    }
}
