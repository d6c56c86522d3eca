//! Dataset ingestion, splitting, and synthetic data generation.
//!
//! Two on-disk formats are supported: dense CSV with a header row whose last
//! column is the binary label, and sparse LIBSVM lines
//! (`label idx:val ...`, 1-based indices). Labels must be `{0, 1}` or
//! `{-1, +1}` (remapped to `{0, 1}`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::derive_seed;
use crate::error::{Error, Result};

/// On-disk dataset format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Libsvm,
}

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major `n_rows * n_features` values.
    Dense(Vec<f64>),
    /// Per-row sorted `(feature index, value)` pairs.
    Sparse(Vec<Vec<(u32, f64)>>),
}

/// Feature matrix with binary labels.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    n_features: usize,
    feature_names: Vec<String>,
    labels: Vec<bool>,
    storage: Storage,
}

impl LabeledDataset {
    /// Dense dataset from a row-major value buffer.
    pub fn from_dense(
        values: Vec<f64>,
        n_features: usize,
        labels: Vec<bool>,
        feature_names: Option<Vec<String>>,
    ) -> Self {
        assert_eq!(values.len(), labels.len() * n_features);
        let feature_names = feature_names
            .unwrap_or_else(|| (0..n_features).map(|j| format!("f{j}")).collect());
        assert_eq!(feature_names.len(), n_features);
        Self {
            n_features,
            feature_names,
            labels,
            storage: Storage::Dense(values),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label(&self, row: usize) -> bool {
        self.labels[row]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        match &self.storage {
            Storage::Dense(values) => values[row * self.n_features + col],
            Storage::Sparse(rows) => rows[row]
                .binary_search_by_key(&(col as u32), |&(index, _)| index)
                .map(|pos| rows[row][pos].1)
                .unwrap_or(0.0),
        }
    }

    /// Copy the values of `cols` (ascending indices) from one row into `out`.
    pub fn gather_row(&self, row: usize, cols: &[usize], out: &mut [f64]) {
        debug_assert_eq!(cols.len(), out.len());
        match &self.storage {
            Storage::Dense(values) => {
                let base = row * self.n_features;
                for (slot, &col) in out.iter_mut().zip(cols) {
                    *slot = values[base + col];
                }
            }
            Storage::Sparse(rows) => {
                out.fill(0.0);
                let entries = &rows[row];
                let mut cursor = 0;
                for &(index, value) in entries {
                    let index = index as usize;
                    while cursor < cols.len() && cols[cursor] < index {
                        cursor += 1;
                    }
                    if cursor == cols.len() {
                        break;
                    }
                    if cols[cursor] == index {
                        out[cursor] = value;
                        cursor += 1;
                    }
                }
            }
        }
    }

    /// Per-column mean and (population) standard deviation over `rows`.
    pub fn column_moments(&self, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let n = rows.len().max(1) as f64;
        let mut sums = vec![0.0; self.n_features];
        let mut square_sums = vec![0.0; self.n_features];
        match &self.storage {
            Storage::Dense(values) => {
                for &row in rows {
                    let base = row * self.n_features;
                    for col in 0..self.n_features {
                        let v = values[base + col];
                        sums[col] += v;
                        square_sums[col] += v * v;
                    }
                }
            }
            Storage::Sparse(sparse_rows) => {
                for &row in rows {
                    for &(index, value) in &sparse_rows[row] {
                        sums[index as usize] += value;
                        square_sums[index as usize] += value * value;
                    }
                }
            }
        }
        let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let stds: Vec<f64> = square_sums
            .iter()
            .zip(&means)
            .map(|(sq, mean)| (sq / n - mean * mean).max(0.0).sqrt())
            .collect();
        (means, stds)
    }
}

fn normalize_label(raw: f64, line: usize) -> Result<bool> {
    if raw == 0.0 || raw == -1.0 {
        Ok(false)
    } else if raw == 1.0 {
        Ok(true)
    } else {
        let _ = line;
        Err(Error::LabelDomain(raw))
    }
}

/// Load a dataset from disk in the given format.
pub fn load_dataset(path: &Path, format: DataFormat) -> Result<LabeledDataset> {
    let data = match format {
        DataFormat::Csv => load_csv(path)?,
        DataFormat::Libsvm => load_libsvm(path)?,
    };
    if data.n_rows() == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "dataset contains no samples".into(),
        });
    }
    let positives = data.positive_count();
    if positives == 0 || positives == data.n_rows() {
        return Err(Error::SingleClassLabels);
    }
    Ok(data)
}

fn load_csv(path: &Path) -> Result<LabeledDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header row".into(),
    })??;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let n_features = columns.len() - 1;
    let feature_names: Vec<String> = columns[..n_features].iter().map(|s| s.to_string()).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (index, line) in lines.enumerate() {
        let line_no = index + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", columns.len(), fields.len()),
            });
        }
        for field in &fields[..n_features] {
            values.push(field.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad feature value {field:?}: {e}"),
            })?);
        }
        let raw_label = fields[n_features].parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad label {:?}: {e}", fields[n_features]),
        })?;
        labels.push(normalize_label(raw_label, line_no)?);
    }
    Ok(LabeledDataset::from_dense(
        values,
        n_features,
        labels,
        Some(feature_names),
    ))
}

fn load_libsvm(path: &Path) -> Result<LabeledDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_token = tokens.next().unwrap();
        let raw_label = label_token.parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad label {label_token:?}: {e}"),
        })?;
        labels.push(normalize_label(raw_label, line_no)?);

        let mut row = Vec::new();
        for token in tokens {
            let (index_part, value_part) = token.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected idx:val, found {token:?}"),
            })?;
            let one_based: usize = index_part.parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad feature index {index_part:?}: {e}"),
            })?;
            if one_based == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "feature indices are 1-based".into(),
                });
            }
            let value: f64 = value_part.parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad feature value {value_part:?}: {e}"),
            })?;
            max_index = max_index.max(one_based);
            row.push((one_based as u32 - 1, value));
        }
        row.sort_unstable_by_key(|&(i, _)| i);
        rows.push(row);
    }
    Ok(LabeledDataset {
        n_features: max_index,
        feature_names: (0..max_index).map(|j| format!("f{j}")).collect(),
        labels,
        storage: Storage::Sparse(rows),
    })
}

/// Write a dataset as CSV (header row, final column `label`).
pub fn save_csv(data: &LabeledDataset, path: &Path) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    let mut header = data.feature_names().join(",");
    header.push_str(",label");
    writeln!(writer, "{header}")?;
    let mut row_buffer = vec![0.0; data.n_features()];
    let all_cols: Vec<usize> = (0..data.n_features()).collect();
    for row in 0..data.n_rows() {
        data.gather_row(row, &all_cols, &mut row_buffer);
        let mut line = String::new();
        for value in &row_buffer {
            line.push_str(&format!("{value}"));
            line.push(',');
        }
        line.push_str(if data.label(row) { "1" } else { "0" });
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(())
}

/// Stratified train/test split: class proportions are preserved within
/// rounding, the parts are disjoint, and their union covers every row.
/// Returns ascending row-index vectors `(train, test)`.
pub fn stratified_split(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [false, true] {
        let mut rows: Vec<usize> = (0..data.n_rows())
            .filter(|&row| data.label(row) == class)
            .collect();
        if rows.len() < 2 {
            return Err(Error::TooFewSamplesPerClass {
                class: class as u8,
                available: rows.len(),
                required: 2,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, class as u64));
        rows.shuffle(&mut rng);
        let n_train = ((train_fraction * rows.len() as f64).round() as usize)
            .clamp(1, rows.len() - 1);
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Synthetic dataset plus the ground-truth informative feature set.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub data: LabeledDataset,
    /// Indices of the features the labels actually depend on.
    pub informative: Vec<usize>,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generate a classification task whose labels depend, through a weighted
/// linear score, only on the first `n_informative` features. `noise` is the
/// standard deviation of Gaussian noise added to the score before
/// thresholding at its median, so `noise = 0` gives a task that the true
/// feature subset separates perfectly. Labels are balanced by construction.
pub fn generate_synthetic_dataset(
    n_samples: usize,
    n_features: usize,
    n_informative: usize,
    noise: f64,
    seed: u64,
) -> Result<SyntheticDataset> {
    if n_informative == 0 {
        return Err(Error::Config(
            "n_informative must be at least 1; labels would be pure noise".into(),
        ));
    }
    if n_informative > n_features {
        return Err(Error::Config(format!(
            "n_informative {n_informative} exceeds n_features {n_features}"
        )));
    }
    if n_samples < 4 {
        return Err(Error::Config("need at least 4 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_samples * n_features);
    for _ in 0..n_samples * n_features {
        values.push(standard_normal(&mut rng));
    }
    // Geometrically decaying magnitudes: the leading features dominate the
    // score, later informative features refine it.
    let coefficients: Vec<f64> = (0..n_informative)
        .map(|j| {
            let magnitude = 4.0 * 0.4f64.powi(j as i32);
            if j % 2 == 0 {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let scores: Vec<f64> = (0..n_samples)
        .map(|row| {
            let base = row * n_features;
            let signal: f64 = coefficients
                .iter()
                .enumerate()
                .map(|(j, c)| c * values[base + j])
                .sum();
            signal + noise * standard_normal(&mut rng)
        })
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let threshold = sorted[(n_samples - 1) / 2];
    let labels: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
    Ok(SyntheticDataset {
        data: LabeledDataset::from_dense(values, n_features, labels, None),
        informative: (0..n_informative).collect(),
    })
}
