//! Algorithm variants and run configuration.
//!
//! The configuration file is flat TOML whose keys mirror
//! [`AlgorithmConfig`] field names. `variant`/`classifier` accept a single
//! value, `variants`/`classifiers` a list; an experiment runs every
//! requested combination.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classifier::TrainOptions;
use crate::dataset::DataFormat;
use crate::error::{Error, Result};
use crate::quantum::RotationTable;

/// The algorithm family: a plain binary-DE baseline, quantum-encoded DE
/// (with or without the rotation gate), and rotation-sweep variants that
/// drop the DE operators entirely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Binary differential evolution, no quantum encoding.
    #[serde(rename = "bde")]
    Bde,
    /// Quantum DE, amplitude mutation, uniform initialization.
    #[serde(rename = "qbde-i")]
    QbdeI,
    /// Quantum DE, rotation gate, uniform initialization.
    #[serde(rename = "qbde-ii")]
    QbdeII,
    /// Quantum DE, amplitude mutation, chaotic initialization (no burn-in).
    #[serde(rename = "cqbde-i")]
    CqbdeI,
    /// Quantum DE, rotation gate, chaotic initialization (no burn-in).
    #[serde(rename = "cqbde-ii")]
    CqbdeII,
    /// Quantum DE, amplitude mutation, burned-in chaotic initialization.
    #[serde(rename = "clqbde-i")]
    ClqbdeI,
    /// Quantum DE, rotation gate, burned-in chaotic initialization.
    #[serde(rename = "clqbde-ii")]
    ClqbdeII,
    /// Rotation-sweep algorithm, standard collapse, chaotic initialization.
    #[serde(rename = "cqiea")]
    Cqiea,
    /// Rotation-sweep algorithm plus the threshold-gated collapse.
    #[serde(rename = "ctqiea")]
    Ctqiea,
    /// Threshold-gated rotation sweep with burned-in chaotic initialization.
    #[serde(rename = "cltqiea")]
    Cltqiea,
}

/// How a variant produces offspring each generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionStyle {
    /// Mutation, sigmoid discretization, crossover, pairwise selection.
    BinaryDe,
    /// Amplitude-space differential mutation, crossover, merge-truncate.
    QuantumMutation,
    /// Rotation gate toward the island best, crossover, merge-truncate.
    RotationGate,
    /// Rotation sweep toward the best-so-far, re-collapse, merge-truncate.
    QieaSweep,
}

/// Collapse rule used when sampling masks from a quantum matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollapseRule {
    Standard,
    Threshold,
}

/// Where population initialization draws its values from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitSource {
    /// Bernoulli(theta) bits, no quantum matrix.
    BernoulliBits,
    /// Amplitudes drawn from the uniform source.
    UniformAmplitudes,
    /// Amplitudes drawn from a logistic-map stream after `burn_in` steps.
    ChaoticAmplitudes { burn_in: usize },
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Bde,
        Variant::QbdeI,
        Variant::QbdeII,
        Variant::CqbdeI,
        Variant::CqbdeII,
        Variant::ClqbdeI,
        Variant::ClqbdeII,
        Variant::Cqiea,
        Variant::Ctqiea,
        Variant::Cltqiea,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Bde => "BDE",
            Variant::QbdeI => "QBDE-I",
            Variant::QbdeII => "QBDE-II",
            Variant::CqbdeI => "CQBDE-I",
            Variant::CqbdeII => "CQBDE-II",
            Variant::ClqbdeI => "CLQBDE-I",
            Variant::ClqbdeII => "CLQBDE-II",
            Variant::Cqiea => "CQIEA",
            Variant::Ctqiea => "CTQIEA",
            Variant::Cltqiea => "CLTQIEA",
        }
    }

    pub fn is_quantum(&self) -> bool {
        !matches!(self, Variant::Bde)
    }

    pub fn style(&self) -> EvolutionStyle {
        match self {
            Variant::Bde => EvolutionStyle::BinaryDe,
            Variant::QbdeI | Variant::CqbdeI | Variant::ClqbdeI => EvolutionStyle::QuantumMutation,
            Variant::QbdeII | Variant::CqbdeII | Variant::ClqbdeII => EvolutionStyle::RotationGate,
            Variant::Cqiea | Variant::Ctqiea | Variant::Cltqiea => EvolutionStyle::QieaSweep,
        }
    }

    pub fn collapse_rule(&self) -> CollapseRule {
        match self {
            Variant::Cqiea => CollapseRule::Standard,
            _ => CollapseRule::Threshold,
        }
    }

    /// Whether this variant burns in its chaotic stream before use.
    pub fn uses_lyapunov_guidance(&self) -> bool {
        matches!(
            self,
            Variant::ClqbdeI | Variant::ClqbdeII | Variant::Cltqiea
        )
    }

    /// Initialization source given the configured burn-in.
    pub fn init_source(&self, burn_in: usize) -> InitSource {
        match self {
            Variant::Bde => InitSource::BernoulliBits,
            Variant::QbdeI | Variant::QbdeII => InitSource::UniformAmplitudes,
            Variant::CqbdeI | Variant::CqbdeII | Variant::Cqiea | Variant::Ctqiea => {
                InitSource::ChaoticAmplitudes { burn_in: 0 }
            }
            Variant::ClqbdeI | Variant::ClqbdeII | Variant::Cltqiea => {
                InitSource::ChaoticAmplitudes { burn_in }
            }
        }
    }
}

/// Which classifier the wrapper trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    /// Plain logistic regression.
    Lr,
    /// L1-regularized (lasso) logistic regression with coefficient pruning.
    Llr,
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Lr => "LR",
            ClassifierKind::Llr => "LLR",
        }
    }
}

/// Full hyperparameter set for one algorithm run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub variant: Variant,
    pub classifier: ClassifierKind,
    /// Global population size N.
    pub pop_size: usize,
    /// Island sub-population size, at most `pop_size`.
    pub local_pop: usize,
    /// Generations evolved per migration round.
    pub max_generations: usize,
    /// Migration rounds.
    pub max_migrations: usize,
    /// Crossover rate.
    pub cr: f64,
    /// Mutation factor.
    pub f: f64,
    /// Threshold-trick bound on the collapse gate.
    pub theta: f64,
    /// Logistic-map control parameter.
    pub lambda: f64,
    /// Island count k.
    pub islands: usize,
    /// Master seed; per-run and per-island streams derive from it.
    pub seed: u64,
    /// Explicit per-island seeds overriding the derived ones.
    pub island_seeds: Option<Vec<u64>>,
    /// L1 penalty per training sample; the effective penalty is this times
    /// the partition size. Zero disables regularization.
    pub l1_strength: f64,
    /// Chaotic-stream burn-in for the Lyapunov-guided variants.
    pub burn_in: usize,
    /// Route intra-generation draws (collapse, crossover, donor picks)
    /// through the chaotic stream instead of the uniform source.
    pub chaotic_loop_draws: bool,
    /// Coefficient magnitude below which a feature is pruned (lasso only).
    pub prune_eps: f64,
    pub rotation_table: RotationTable,
    pub train_options: TrainOptions,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            variant: Variant::ClqbdeII,
            classifier: ClassifierKind::Llr,
            pop_size: 20,
            local_pop: 10,
            max_generations: 10,
            max_migrations: 1,
            cr: 0.9,
            f: 0.8,
            theta: 0.1,
            lambda: 4.0,
            islands: 2,
            seed: 42,
            island_seeds: None,
            l1_strength: 0.01,
            burn_in: crate::chaos::DEFAULT_BURN_IN,
            chaotic_loop_draws: false,
            prune_eps: 1e-6,
            rotation_table: RotationTable::default(),
            train_options: TrainOptions::default(),
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Config(message));
        if self.pop_size == 0 {
            return fail("pop_size must be positive".into());
        }
        if self.local_pop == 0 || self.local_pop > self.pop_size {
            return fail(format!(
                "local_pop {} must be in 1..=pop_size ({})",
                self.local_pop, self.pop_size
            ));
        }
        if self.max_migrations == 0 {
            return fail("max_migrations must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return fail(format!("cr {} outside [0, 1]", self.cr));
        }
        if !(0.0..=1.0).contains(&self.f) {
            return fail(format!("f {} outside [0, 1]", self.f));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return fail(format!("theta {} outside [0, 1]", self.theta));
        }
        if !(0.0..=4.0).contains(&self.lambda) {
            return fail(format!("lambda {} outside [0, 4]", self.lambda));
        }
        if self.islands == 0 {
            return fail("islands must be at least 1".into());
        }
        if self.l1_strength < 0.0 {
            return fail("l1_strength must be non-negative".into());
        }
        if let Some(seeds) = &self.island_seeds {
            if seeds.len() != self.islands {
                return fail(format!(
                    "island_seeds has {} entries for {} islands",
                    seeds.len(),
                    self.islands
                ));
            }
        }
        // Differential mutation needs three donors distinct from the target.
        let needs_donors = matches!(
            self.variant.style(),
            EvolutionStyle::BinaryDe | EvolutionStyle::QuantumMutation
        );
        if needs_donors && self.max_generations > 0 && self.local_pop < 4 {
            return fail(format!(
                "variant {} needs local_pop >= 4 for donor sampling",
                self.variant.name()
            ));
        }
        if self.variant.uses_lyapunov_guidance() && self.burn_in < crate::chaos::DEFAULT_BURN_IN {
            return fail(format!(
                "variant {} requires burn_in >= {}",
                self.variant.name(),
                crate::chaos::DEFAULT_BURN_IN
            ));
        }
        Ok(())
    }

    /// Effective L1 penalty for a partition of `n_rows` samples.
    pub fn l1_for(&self, n_rows: usize) -> f64 {
        match self.classifier {
            ClassifierKind::Lr => 0.0,
            ClassifierKind::Llr => self.l1_strength * n_rows as f64,
        }
    }
}

/// Experiment-level settings: dataset, run count, and the variant/classifier
/// grid sharing one [`AlgorithmConfig`] base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub format: DataFormat,
    /// Independent runs per combination; per-run seed is `seed + run index`.
    pub runs: usize,
    pub train_fraction: f64,
    /// Execute runs on worker threads. Results are identical either way.
    pub parallel_runs: bool,
    pub variants: Vec<Variant>,
    pub classifiers: Vec<ClassifierKind>,
    pub base: AlgorithmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            format: DataFormat::Csv,
            runs: 20,
            train_fraction: 0.8,
            parallel_runs: false,
            variants: vec![AlgorithmConfig::default().variant],
            classifiers: vec![AlgorithmConfig::default().classifier],
            base: AlgorithmConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(0.0 < self.train_fraction && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if self.variants.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config(
                "at least one variant and one classifier are required".into(),
            ));
        }
        for combo in self.combos() {
            combo.validate()?;
        }
        Ok(())
    }

    /// One [`AlgorithmConfig`] per requested variant x classifier pair,
    /// in declaration order.
    pub fn combos(&self) -> Vec<AlgorithmConfig> {
        let mut combos = Vec::new();
        for &variant in &self.variants {
            for &classifier in &self.classifiers {
                let mut config = self.base.clone();
                config.variant = variant;
                config.classifier = classifier;
                combos.push(config);
            }
        }
        combos
    }
}

/// Flat TOML schema; every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<String>,
    format: Option<DataFormat>,
    runs: Option<usize>,
    train_fraction: Option<f64>,
    parallel_runs: Option<bool>,
    variant: Option<Variant>,
    variants: Option<Vec<Variant>>,
    classifier: Option<ClassifierKind>,
    classifiers: Option<Vec<ClassifierKind>>,
    pop_size: Option<usize>,
    local_pop: Option<usize>,
    max_generations: Option<usize>,
    max_migrations: Option<usize>,
    cr: Option<f64>,
    f: Option<f64>,
    theta: Option<f64>,
    lambda: Option<f64>,
    islands: Option<usize>,
    seed: Option<u64>,
    island_seeds: Option<Vec<u64>>,
    l1_strength: Option<f64>,
    burn_in: Option<usize>,
    chaotic_loop_draws: Option<bool>,
    prune_eps: Option<f64>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
    /// Eight signed multiples of pi, rows ordered by
    /// `(x_bit << 2) | (best_bit << 1) | x_is_fitter`.
    rotation_table: Option<Vec<f64>>,
}

/// Parse and validate an experiment configuration from flat TOML text.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))?;

    let mut base = AlgorithmConfig::default();
    if let Some(v) = raw.pop_size {
        base.pop_size = v;
    }
    if let Some(v) = raw.local_pop {
        base.local_pop = v;
    }
    if let Some(v) = raw.max_generations {
        base.max_generations = v;
    }
    if let Some(v) = raw.max_migrations {
        base.max_migrations = v;
    }
    if let Some(v) = raw.cr {
        base.cr = v;
    }
    if let Some(v) = raw.f {
        base.f = v;
    }
    if let Some(v) = raw.theta {
        base.theta = v;
    }
    if let Some(v) = raw.lambda {
        base.lambda = v;
    }
    if let Some(v) = raw.islands {
        base.islands = v;
    }
    if let Some(v) = raw.seed {
        base.seed = v;
    }
    if raw.island_seeds.is_some() {
        base.island_seeds = raw.island_seeds;
    }
    if let Some(v) = raw.l1_strength {
        base.l1_strength = v;
    }
    if let Some(v) = raw.burn_in {
        base.burn_in = v;
    }
    if let Some(v) = raw.chaotic_loop_draws {
        base.chaotic_loop_draws = v;
    }
    if let Some(v) = raw.prune_eps {
        base.prune_eps = v;
    }
    if let Some(v) = raw.max_iterations {
        base.train_options.max_iterations = v;
    }
    if let Some(v) = raw.tolerance {
        base.train_options.tolerance = v;
    }
    if let Some(rows) = raw.rotation_table {
        let rows: [f64; 8] = rows.try_into().map_err(|rows: Vec<f64>| {
            Error::Config(format!("rotation_table needs 8 rows, found {}", rows.len()))
        })?;
        base.rotation_table = RotationTable::from_pi_multiples(rows);
    }

    let variants = match (raw.variant, raw.variants) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "set either `variant` or `variants`, not both".into(),
            ))
        }
        (Some(one), None) => vec![one],
        (None, Some(many)) => many,
        (None, None) => vec![base.variant],
    };
    let classifiers = match (raw.classifier, raw.classifiers) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "set either `classifier` or `classifiers`, not both".into(),
            ))
        }
        (Some(one), None) => vec![one],
        (None, Some(many)) => many,
        (None, None) => vec![base.classifier],
    };
    base.variant = variants[0];
    base.classifier = classifiers[0];

    let config = ExperimentConfig {
        dataset: raw.dataset.map(PathBuf::from),
        format: raw.format.unwrap_or(DataFormat::Csv),
        runs: raw.runs.unwrap_or(20),
        train_fraction: raw.train_fraction.unwrap_or(0.8),
        parallel_runs: raw.parallel_runs.unwrap_or(false),
        variants,
        classifiers,
        base,
    };
    config.validate()?;
    Ok(config)
}
