//! Multi-run, multi-variant experiment orchestration and reporting.
//!
//! An experiment fixes one stratified train/test split, then executes every
//! requested variant x classifier combination for `runs` independent runs.
//! The per-run seed is `seed + run index`. Each run's top solution is the
//! one with the highest test AUC; the report carries the per-run rows, their
//! means, and — when at least two combinations ran — a pooled two-sample
//! t-test between the per-run AUC vectors of the two best combinations.

use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmConfig, ClassifierKind, ExperimentConfig, Variant};
use crate::dataset::{stratified_split, LabeledDataset};
use crate::error::Result;
use crate::island::{run_single, RunOutcome};
use crate::stats::{mean, two_sample_t_test};

/// Dataset shape echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub features: usize,
    pub positives: usize,
    pub train_rows: usize,
    pub test_rows: usize,
}

/// Top solution of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub key: u64,
    pub test_auc: f64,
    pub cardinality: usize,
    pub test_fitness: f64,
    pub train_auc: f64,
}

/// Aggregated results of one variant x classifier combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboReport {
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub runs: Vec<RunRow>,
    pub mean_auc: f64,
    pub mean_cardinality: f64,
    pub mean_test_fitness: f64,
}

impl ComboReport {
    pub fn label(&self) -> String {
        format!("{}+{}", self.variant.name(), self.classifier.name())
    }

    /// Per-run top test AUCs in run order.
    pub fn auc_series(&self) -> Vec<f64> {
        self.runs.iter().map(|row| row.test_auc).collect()
    }
}

/// Comparison of the two best combinations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestSummary {
    pub a: String,
    pub b: String,
    pub t_statistic: f64,
    pub p_value: f64,
    pub df: usize,
    pub significant_at_5_percent: bool,
}

/// Machine-readable experiment report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub runs: usize,
    pub train_fraction: f64,
    pub dataset: DatasetSummary,
    pub combos: Vec<ComboReport>,
    pub t_test: Option<TTestSummary>,
}

/// Full per-run artifacts of one combination, for diagnostics export.
#[derive(Clone, Debug)]
pub struct ComboArtifacts {
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub outcomes: Vec<RunOutcome>,
}

/// Run the experiment and keep only the report.
pub fn run_experiment(
    config: &ExperimentConfig,
    data: &LabeledDataset,
) -> Result<ExperimentReport> {
    run_experiment_full(config, data).map(|(report, _)| report)
}

/// Run the experiment, returning the report plus every run's artifacts.
pub fn run_experiment_full(
    config: &ExperimentConfig,
    data: &LabeledDataset,
) -> Result<(ExperimentReport, Vec<ComboArtifacts>)> {
    config.validate()?;
    let (train_rows, test_rows) = stratified_split(data, config.train_fraction, config.base.seed)?;

    let mut combos = Vec::new();
    let mut artifacts = Vec::new();
    for combo_config in config.combos() {
        let outcomes = run_all_runs(config, &combo_config, data, &train_rows, &test_rows)?;
        let rows: Vec<RunRow> = outcomes
            .iter()
            .enumerate()
            .map(|(run, outcome)| {
                let top = outcome.top_outcome();
                RunRow {
                    run,
                    seed: combo_config.seed.wrapping_add(run as u64),
                    key: top.key,
                    test_auc: top.test_auc,
                    cardinality: top.cardinality,
                    test_fitness: top.test_fitness,
                    train_auc: top.train_auc,
                }
            })
            .collect();
        let aucs: Vec<f64> = rows.iter().map(|row| row.test_auc).collect();
        let cardinalities: Vec<f64> = rows.iter().map(|row| row.cardinality as f64).collect();
        let fitnesses: Vec<f64> = rows.iter().map(|row| row.test_fitness).collect();
        combos.push(ComboReport {
            variant: combo_config.variant,
            classifier: combo_config.classifier,
            mean_auc: mean(&aucs),
            mean_cardinality: mean(&cardinalities),
            mean_test_fitness: mean(&fitnesses),
            runs: rows,
        });
        artifacts.push(ComboArtifacts {
            variant: combo_config.variant,
            classifier: combo_config.classifier,
            outcomes,
        });
    }

    let t_test = top_two_t_test(&combos)?;
    let report = ExperimentReport {
        seed: config.base.seed,
        runs: config.runs,
        train_fraction: config.train_fraction,
        dataset: DatasetSummary {
            rows: data.n_rows(),
            features: data.n_features(),
            positives: data.positive_count(),
            train_rows: train_rows.len(),
            test_rows: test_rows.len(),
        },
        combos,
        t_test,
    };
    Ok((report, artifacts))
}

fn run_all_runs(
    config: &ExperimentConfig,
    combo_config: &AlgorithmConfig,
    data: &LabeledDataset,
    train_rows: &[usize],
    test_rows: &[usize],
) -> Result<Vec<RunOutcome>> {
    let run_seed = |run: usize| combo_config.seed.wrapping_add(run as u64);
    if !config.parallel_runs || config.runs == 1 {
        return (0..config.runs)
            .map(|run| run_single(combo_config, data, train_rows, test_rows, run_seed(run)))
            .collect();
    }
    let results: Vec<Result<RunOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.runs)
            .map(|run| {
                scope.spawn(move || {
                    run_single(combo_config, data, train_rows, test_rows, run_seed(run))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("run thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Pooled t-test between the two best combinations by mean AUC. `None`
/// when fewer than two combinations or fewer than two runs.
fn top_two_t_test(combos: &[ComboReport]) -> Result<Option<TTestSummary>> {
    if combos.len() < 2 || combos.iter().any(|combo| combo.runs.len() < 2) {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..combos.len()).collect();
    order.sort_by(|&a, &b| combos[b].mean_auc.total_cmp(&combos[a].mean_auc));
    let (first, second) = (&combos[order[0]], &combos[order[1]]);
    let outcome = two_sample_t_test(&first.auc_series(), &second.auc_series())?;
    Ok(Some(TTestSummary {
        a: first.label(),
        b: second.label(),
        t_statistic: outcome.t_statistic,
        p_value: outcome.p_value,
        df: outcome.df,
        significant_at_5_percent: outcome.p_value < 0.05,
    }))
}

/// Aligned text table of the per-combination summary, one row per
/// variant x classifier pair.
pub fn render_text_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<10} {:>9} {:>17} {:>18}\n",
        "variant", "classifier", "mean_auc", "mean_cardinality", "mean_test_fitness"
    ));
    for combo in &report.combos {
        out.push_str(&format!(
            "{:<10} {:<10} {:>9.3} {:>17.2} {:>18.3}\n",
            combo.variant.name(),
            combo.classifier.name(),
            combo.mean_auc,
            combo.mean_cardinality,
            combo.mean_test_fitness
        ));
    }
    if let Some(t) = &report.t_test {
        out.push_str(&format!(
            "t-test {} vs {}: t = {:.3}, p = {:.4}, df = {} ({})\n",
            t.a,
            t.b,
            t.t_statistic,
            t.p_value,
            t.df,
            if t.significant_at_5_percent {
                "significant at 5%"
            } else {
                "not significant at 5%"
            }
        ));
    }
    out
}
