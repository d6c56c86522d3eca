//! Wrapped classifiers and the AUC fitness.
//!
//! The wrapper trains a logistic regression on the masked feature columns.
//! An L1 penalty (the lasso variant) drives irrelevant coefficients to exact
//! zero, which [`prune_by_coefficients`] then converts into a smaller mask.
//! Fitness is the balanced AUC `(sensitivity + specificity) / 2` of the
//! hard 0.5-threshold predictions.
//!
//! Training minimizes the summed logistic loss plus `l1_strength * |w|_1`
//! (intercept unpenalized) by proximal gradient descent with a backtracking
//! step size, so the recorded loss trace is non-increasing. Features are
//! standardized with moments supplied by the caller — one [`Standardizer`]
//! per data partition — and the scaling is folded back into the returned
//! coefficients, which therefore apply directly to raw feature values.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::de::BinaryVector;
use crate::error::{Error, Result};

/// Iteration cap and convergence tolerance for the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub max_iterations: usize,
    /// Stop once the objective improves by less than this.
    pub tolerance: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-6,
        }
    }
}

/// Per-column centering and scaling parameters fitted on one data partition.
#[derive(Clone, Debug)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Fit column moments over the given rows. Near-constant columns get a
    /// unit scale so they pass through unchanged.
    pub fn fit(data: &LabeledDataset, rows: &[usize]) -> Self {
        let (means, mut stds) = data.column_moments(rows);
        for std in &mut stds {
            if *std < 1e-12 {
                *std = 1.0;
            }
        }
        Self { means, stds }
    }

    /// No-op standardizer (zero means, unit scales) for `n` columns.
    pub fn identity(n: usize) -> Self {
        Self {
            means: vec![0.0; n],
            stds: vec![1.0; n],
        }
    }

    pub fn mean(&self, col: usize) -> f64 {
        self.means[col]
    }

    pub fn std(&self, col: usize) -> f64 {
        self.stds[col]
    }
}

/// Trained linear classifier over a feature subset. Weights are expressed in
/// raw feature space, so predictions need no standardizer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearModel {
    /// Feature indices the weights correspond to, ascending.
    pub selected_indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Solver objective per iteration (training-space), non-increasing.
    pub loss_trace: Vec<f64>,
}

impl LinearModel {
    /// Linear score `intercept + w . x_selected` for one row.
    pub fn score(&self, data: &LabeledDataset, row: usize) -> f64 {
        let mut score = self.intercept;
        for (&col, &weight) in self.selected_indices.iter().zip(&self.weights) {
            score += weight * data.value(row, col);
        }
        score
    }

    /// Number of coefficients with magnitude at least `eps`.
    pub fn nonzero_count(&self, eps: f64) -> usize {
        self.weights.iter().filter(|w| w.abs() >= eps).count()
    }

    /// Model restricted to the indices still present in `mask`; used after
    /// coefficient pruning so stored coefficients match the stored mask.
    pub fn restricted_to(&self, mask: &BinaryVector) -> LinearModel {
        let mut selected_indices = Vec::new();
        let mut weights = Vec::new();
        for (&col, &weight) in self.selected_indices.iter().zip(&self.weights) {
            if mask.get(col) {
                selected_indices.push(col);
                weights.push(weight);
            }
        }
        LinearModel {
            selected_indices,
            weights,
            intercept: self.intercept,
            loss_trace: self.loss_trace.clone(),
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable `ln(1 + exp(x))`.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn soft_threshold(x: f64, threshold: f64) -> f64 {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// Train a (possibly L1-regularized) logistic regression on the masked
/// columns of the given rows. `l1_strength` is the absolute penalty weight
/// added to the summed log-loss; zero gives plain logistic regression.
/// Deterministic given data, mask, and options.
pub fn train_model(
    data: &LabeledDataset,
    rows: &[usize],
    mask: &BinaryVector,
    l1_strength: f64,
    standardizer: &Standardizer,
    options: &TrainOptions,
) -> Result<LinearModel> {
    let selected = mask.ones_indices();
    if selected.is_empty() {
        return Err(Error::NoFeatures);
    }
    let n_rows = rows.len();
    let n_sel = selected.len();
    let labels: Vec<f64> = rows
        .iter()
        .map(|&row| if data.label(row) { 1.0 } else { 0.0 })
        .collect();
    let positives = labels.iter().sum::<f64>() as usize;
    if positives == 0 || positives == n_rows {
        return Err(Error::SingleClassPartition);
    }

    // Standardized design matrix, row-major n_rows x n_sel.
    let mut design = vec![0.0; n_rows * n_sel];
    let mut scratch = vec![0.0; n_sel];
    for (r, &row) in rows.iter().enumerate() {
        data.gather_row(row, &selected, &mut scratch);
        for (c, &col) in selected.iter().enumerate() {
            design[r * n_sel + c] =
                (scratch[c] - standardizer.mean(col)) / standardizer.std(col);
        }
    }

    let objective = |weights: &[f64], intercept: f64, scores: &mut [f64]| -> f64 {
        let mut loss = 0.0;
        for r in 0..n_rows {
            let mut z = intercept;
            let base = r * n_sel;
            for c in 0..n_sel {
                z += weights[c] * design[base + c];
            }
            scores[r] = z;
            loss += softplus(z) - labels[r] * z;
        }
        loss + l1_strength * weights.iter().map(|w| w.abs()).sum::<f64>()
    };

    let mut weights = vec![0.0; n_sel];
    let mut intercept = 0.0;
    let mut scores = vec![0.0; n_rows];
    let mut current = objective(&weights, intercept, &mut scores);
    let mut trace = vec![current];

    let mut gradient = vec![0.0; n_sel];
    let mut candidate_weights = vec![0.0; n_sel];
    let mut candidate_scores = vec![0.0; n_rows];
    let mut step = 1.0f64;
    for _ in 0..options.max_iterations {
        gradient.fill(0.0);
        let mut gradient_intercept = 0.0;
        for r in 0..n_rows {
            let residual = sigmoid(scores[r]) - labels[r];
            gradient_intercept += residual;
            let base = r * n_sel;
            for c in 0..n_sel {
                gradient[c] += residual * design[base + c];
            }
        }

        // Backtracking: accept the first step that does not increase the
        // objective, which keeps the trace monotone.
        step = (step * 2.0).min(1e6);
        let mut accepted = None;
        while step > 1e-18 {
            for c in 0..n_sel {
                candidate_weights[c] =
                    soft_threshold(weights[c] - step * gradient[c], step * l1_strength);
            }
            let candidate_intercept = intercept - step * gradient_intercept;
            let value = objective(&candidate_weights, candidate_intercept, &mut candidate_scores);
            if value <= current {
                accepted = Some((candidate_intercept, value));
                break;
            }
            step *= 0.5;
        }
        let Some((new_intercept, value)) = accepted else {
            break;
        };
        std::mem::swap(&mut weights, &mut candidate_weights);
        std::mem::swap(&mut scores, &mut candidate_scores);
        intercept = new_intercept;
        let improvement = current - value;
        current = value;
        trace.push(current);
        if improvement < options.tolerance {
            break;
        }
    }

    // Fold standardization into raw-space coefficients.
    let mut raw_weights = Vec::with_capacity(n_sel);
    let mut raw_intercept = intercept;
    for (c, &col) in selected.iter().enumerate() {
        let scaled = weights[c] / standardizer.std(col);
        raw_weights.push(scaled);
        raw_intercept -= scaled * standardizer.mean(col);
    }
    Ok(LinearModel {
        selected_indices: selected,
        weights: raw_weights,
        intercept: raw_intercept,
        loss_trace: trace,
    })
}

/// Hard predictions: label 1 when `intercept + w . x >= 0`.
pub fn predict_labels(
    model: &LinearModel,
    data: &LabeledDataset,
    rows: &[usize],
) -> Result<Vec<bool>> {
    if model
        .selected_indices
        .iter()
        .any(|&col| col >= data.n_features())
    {
        return Err(Error::DimensionMismatch);
    }
    Ok(rows
        .iter()
        .map(|&row| model.score(data, row) >= 0.0)
        .collect())
}

/// Confusion-matrix counts of a hard binary prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_negatives + self.true_negatives + self.false_positives
    }
}

/// Confusion counts plus the derived rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub counts: ConfusionCounts,
    /// True positive rate `TP / (TP + FN)`.
    pub sensitivity: f64,
    /// True negative rate `TN / (TN + FP)`.
    pub specificity: f64,
    /// Balanced AUC `(sensitivity + specificity) / 2`.
    pub auc: f64,
}

/// Score hard predictions against labels. Labels must contain both classes.
pub fn evaluate_auc(predictions: &[bool], labels: &[bool]) -> Result<Metrics> {
    assert_eq!(predictions.len(), labels.len());
    let mut counts = ConfusionCounts {
        true_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
        false_positives: 0,
    };
    for (&predicted, &actual) in predictions.iter().zip(labels) {
        match (actual, predicted) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_negatives += 1,
            (false, false) => counts.true_negatives += 1,
            (false, true) => counts.false_positives += 1,
        }
    }
    let positives = counts.true_positives + counts.false_negatives;
    let negatives = counts.true_negatives + counts.false_positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassLabels);
    }
    let sensitivity = counts.true_positives as f64 / positives as f64;
    let specificity = counts.true_negatives as f64 / negatives as f64;
    Ok(Metrics {
        counts,
        sensitivity,
        specificity,
        auc: (sensitivity + specificity) / 2.0,
    })
}

/// Clear every mask bit whose trained coefficient magnitude falls below
/// `eps`. If that would empty the mask, the single largest-magnitude bit is
/// retained.
pub fn prune_by_coefficients(
    mask: &BinaryVector,
    model: &LinearModel,
    eps: f64,
) -> BinaryVector {
    let mut pruned = mask.clone();
    for (&col, &weight) in model.selected_indices.iter().zip(&model.weights) {
        if weight.abs() < eps {
            pruned.set(col, false);
        }
    }
    if pruned.cardinality() == 0 {
        let strongest = model
            .selected_indices
            .iter()
            .zip(&model.weights)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(&col, _)| col);
        if let Some(col) = strongest {
            pruned.set(col, true);
        }
    }
    pruned
}
