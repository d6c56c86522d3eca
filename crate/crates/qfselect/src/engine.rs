//! Per-island evolution engine.
//!
//! A population member is a [`SolutionRecord`]: key, binary mask, optional
//! quantum matrix, trained coefficients, and the AUC those coefficients
//! scored on the island's data. Every variant shares the same
//! train-and-update step; they differ in how the offspring quantum matrix
//! (or bit mask) is produced and in the survivor rule:
//!
//! * the binary-DE baseline keeps the better of each target/trial pair,
//! * every quantum variant merges parents with offspring, sorts by fitness
//!   and truncates, which makes the island's best AUC non-decreasing by
//!   construction.

use serde::{Deserialize, Serialize};

use crate::chaos::{derive_seed, unit_seed, LogisticMapStream, RandomSource};
use crate::classifier::{
    evaluate_auc, predict_labels, prune_by_coefficients, train_model, LinearModel, Standardizer,
};
use crate::config::{AlgorithmConfig, ClassifierKind, CollapseRule, EvolutionStyle, InitSource};
use crate::dataset::LabeledDataset;
use crate::de::{binary_crossover, de_mutation, sigmoid_discretize, BinaryVector};
use crate::error::{Error, Result};
use crate::quantum::{
    collapse_standard, collapse_threshold, quantum_crossover, quantum_mutation, QuantumMatrix,
    QubitPair, RotationTable,
};

/// Seed-stream tags for the driver-side initialization sources.
const ALPHA_STREAM: u64 = 1;
const COLLAPSE_STREAM: u64 = 2;

/// One population member.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// Unique id within a population.
    pub key: u64,
    /// Selected-feature mask.
    pub mask: BinaryVector,
    /// Amplitude encoding; absent for the plain binary-DE variant.
    pub qmatrix: Option<QuantumMatrix>,
    /// Trained classifier coefficients; set by train-and-update.
    pub model: Option<LinearModel>,
    /// AUC of `model` on the training island; set by train-and-update.
    pub auc: Option<f64>,
}

impl SolutionRecord {
    pub fn unevaluated(key: u64, mask: BinaryVector, qmatrix: Option<QuantumMatrix>) -> Self {
        Self {
            key,
            mask,
            qmatrix,
            model: None,
            auc: None,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.mask.cardinality()
    }

    /// Evaluated fitness, or [`Error::UnevaluatedSolution`].
    pub fn fitness(&self) -> Result<f64> {
        self.auc.ok_or(Error::UnevaluatedSolution(self.key))
    }
}

/// Survivor rule for the binary-DE path: the target survives only when its
/// fitness is strictly greater, ties go to the trial.
pub fn select(target: SolutionRecord, trial: SolutionRecord) -> Result<SolutionRecord> {
    let target_fitness = target.fitness()?;
    let trial_fitness = trial.fitness()?;
    Ok(if target_fitness > trial_fitness {
        target
    } else {
        trial
    })
}

/// Fitness ordering: AUC descending, then cardinality ascending, then key
/// ascending. Panics if a record is unevaluated.
pub fn fitness_ordering(a: &SolutionRecord, b: &SolutionRecord) -> std::cmp::Ordering {
    let fa = a.auc.expect("record must be evaluated before sorting");
    let fb = b.auc.expect("record must be evaluated before sorting");
    fb.total_cmp(&fa)
        .then_with(|| a.cardinality().cmp(&b.cardinality()))
        .then_with(|| a.key.cmp(&b.key))
}

/// Sort a population best-first by [`fitness_ordering`].
pub fn sort_by_fitness(records: &mut [SolutionRecord]) {
    records.sort_by(fitness_ordering);
}

fn best_index(records: &[SolutionRecord]) -> usize {
    let mut best = 0;
    for index in 1..records.len() {
        if fitness_ordering(&records[index], &records[best]).is_lt() {
            best = index;
        }
    }
    best
}

/// Build the loop draw source for an island or the driver: uniform by
/// default, or the chaotic stream when `chaotic_loop_draws` is set.
fn loop_source(config: &AlgorithmConfig, seed: u64) -> RandomSource {
    if config.chaotic_loop_draws {
        let burn_in = match config.variant.init_source(config.burn_in) {
            InitSource::ChaoticAmplitudes { burn_in } => burn_in,
            _ => 0,
        };
        let stream = LogisticMapStream::unchecked(unit_seed(seed), config.lambda, burn_in);
        RandomSource::chaotic(stream)
    } else {
        RandomSource::uniform(seed)
    }
}

/// Build the driver-side population: `pop_size` records with keys
/// `0..pop_size`. Quantum variants draw each column's `alpha` from the
/// variant's source (`beta` completes the unit norm) and collapse a mask;
/// the binary baseline draws Bernoulli(theta) masks directly.
pub fn initialize_population(
    config: &AlgorithmConfig,
    n_features: usize,
    run_seed: u64,
) -> Result<Vec<SolutionRecord>> {
    config.validate()?;
    if n_features == 0 {
        return Err(Error::Config("dataset has no features".into()));
    }
    let mut collapse_source = loop_source(config, derive_seed(run_seed, COLLAPSE_STREAM));
    match config.variant.init_source(config.burn_in) {
        InitSource::BernoulliBits => {
            let mut population = Vec::with_capacity(config.pop_size);
            for key in 0..config.pop_size {
                let mut mask = BinaryVector::new(
                    (0..n_features)
                        .map(|_| collapse_source.next_f64() < config.theta)
                        .collect(),
                );
                mask.repair_empty(&mut collapse_source);
                population.push(SolutionRecord::unevaluated(key as u64, mask, None));
            }
            Ok(population)
        }
        InitSource::UniformAmplitudes => {
            let mut alpha_source = RandomSource::uniform(derive_seed(run_seed, ALPHA_STREAM));
            Ok(init_quantum_population(
                &mut alpha_source,
                &mut collapse_source,
                config.variant.collapse_rule(),
                config.theta,
                n_features,
                config.pop_size,
            ))
        }
        InitSource::ChaoticAmplitudes { burn_in } => {
            let seed_state = unit_seed(derive_seed(run_seed, ALPHA_STREAM));
            let stream = LogisticMapStream::new(seed_state, config.lambda, burn_in)?;
            let mut alpha_source = RandomSource::chaotic(stream);
            Ok(init_quantum_population(
                &mut alpha_source,
                &mut collapse_source,
                config.variant.collapse_rule(),
                config.theta,
                n_features,
                config.pop_size,
            ))
        }
    }
}

/// Shared quantum initialization path. The uniform-seeded and chaos-seeded
/// variants differ only in the `alpha_source` handed to this function.
pub fn init_quantum_population(
    alpha_source: &mut RandomSource,
    collapse_source: &mut RandomSource,
    rule: CollapseRule,
    theta: f64,
    n_features: usize,
    pop_size: usize,
) -> Vec<SolutionRecord> {
    (0..pop_size)
        .map(|key| {
            let columns = (0..n_features)
                .map(|_| QubitPair::from_alpha(alpha_source.next_f64()))
                .collect();
            let qmatrix = QuantumMatrix::from_columns(columns);
            let mut mask = match rule {
                CollapseRule::Standard => collapse_standard(&qmatrix, collapse_source),
                CollapseRule::Threshold => collapse_threshold(&qmatrix, collapse_source, theta),
            };
            mask.repair_empty(collapse_source);
            SolutionRecord::unevaluated(key as u64, mask, Some(qmatrix))
        })
        .collect()
}

/// Mutable state of one island between migration barriers: its data rows,
/// standardizer, draw source, key allocator, trace, and (for the rotation
/// sweep) the best record seen so far.
pub struct IslandContext<'a> {
    pub data: &'a LabeledDataset,
    pub rows: &'a [usize],
    pub config: &'a AlgorithmConfig,
    pub standardizer: Standardizer,
    pub rng: RandomSource,
    labels: Vec<bool>,
    island_id: u64,
    next_key: u64,
    pub best_so_far: Option<SolutionRecord>,
    /// Best island AUC after the initial evaluation and after each
    /// generation.
    pub trace: Vec<f64>,
}

impl<'a> IslandContext<'a> {
    pub fn new(
        data: &'a LabeledDataset,
        rows: &'a [usize],
        config: &'a AlgorithmConfig,
        island_id: u64,
        island_seed: u64,
    ) -> Self {
        Self {
            data,
            rows,
            config,
            standardizer: Standardizer::fit(data, rows),
            rng: loop_source(config, island_seed),
            labels: rows.iter().map(|&row| data.label(row)).collect(),
            island_id,
            next_key: 0,
            best_so_far: None,
            trace: Vec::new(),
        }
    }

    /// Key unique across islands and disjoint from driver-assigned keys
    /// (`0..pop_size`): the island index is offset by one in the high bits.
    pub fn fresh_key(&mut self) -> u64 {
        let key = ((self.island_id + 1) << 32) | self.next_key;
        self.next_key += 1;
        key
    }

    fn best_auc(&self, records: &[SolutionRecord]) -> f64 {
        records
            .iter()
            .filter_map(|record| record.auc)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Record the island's current best AUC in the trace.
    pub fn record_generation(&mut self, records: &[SolutionRecord]) {
        let best = self.best_auc(records);
        self.trace.push(best);
    }

    fn refresh_best(&mut self, records: &[SolutionRecord]) {
        let incumbent = &records[best_index(records)];
        let replace = match &self.best_so_far {
            None => true,
            Some(held) => fitness_ordering(incumbent, held).is_lt(),
        };
        if replace {
            self.best_so_far = Some(incumbent.clone());
        }
    }
}

/// Train every record's classifier on the island rows, store the
/// coefficients and AUC, and — for the lasso classifier — replace the mask
/// by its coefficient-pruned version (the stored model is restricted to
/// match).
pub fn train_and_update(records: &mut [SolutionRecord], ctx: &mut IslandContext) -> Result<()> {
    let l1 = ctx.config.l1_for(ctx.rows.len());
    for record in records.iter_mut() {
        let model = train_model(
            ctx.data,
            ctx.rows,
            &record.mask,
            l1,
            &ctx.standardizer,
            &ctx.config.train_options,
        )?;
        let predictions = predict_labels(&model, ctx.data, ctx.rows)?;
        let metrics = evaluate_auc(&predictions, &ctx.labels)?;
        if ctx.config.classifier == ClassifierKind::Llr {
            let pruned = prune_by_coefficients(&record.mask, &model, ctx.config.prune_eps);
            record.model = Some(model.restricted_to(&pruned));
            record.mask = pruned;
        } else {
            record.model = Some(model);
        }
        record.auc = Some(metrics.auc);
    }
    Ok(())
}

/// Three distinct donor indices, none equal to `exclude`.
fn pick_donors(len: usize, exclude: usize, rng: &mut RandomSource) -> [usize; 3] {
    debug_assert!(len >= 4, "donor sampling needs at least 4 records");
    let mut donors = [usize::MAX; 3];
    let mut found = 0;
    while found < 3 {
        let candidate = rng.next_index(len);
        if candidate != exclude && !donors[..found].contains(&candidate) {
            donors[found] = candidate;
            found += 1;
        }
    }
    donors
}

/// Rotate every qubit of `record` toward `best`'s mask using the lookup
/// table. The per-qubit angle is the table entry for
/// `(record bit, best bit, record fitter)`, sign-adjusted so that a positive
/// table angle always moves `beta^2` toward bit 1 (see
/// [`QubitPair::steering_sign`]). Agreeing bits are left untouched.
pub fn rotate_toward(
    record: &SolutionRecord,
    best: &SolutionRecord,
    table: &RotationTable,
) -> QuantumMatrix {
    let qmatrix = record
        .qmatrix
        .as_ref()
        .expect("rotation requires a quantum matrix");
    let x_is_fitter = match (record.auc, best.auc) {
        (Some(own), Some(reference)) => own > reference,
        _ => false,
    };
    QuantumMatrix::from_columns(
        qmatrix
            .columns()
            .iter()
            .enumerate()
            .map(|(j, column)| {
                let angle = table.angle(record.mask.get(j), best.mask.get(j), x_is_fitter);
                if angle == 0.0 {
                    *column
                } else {
                    column.rotated(angle * column.steering_sign())
                }
            })
            .collect(),
    )
}

fn collapse_for(
    rule: CollapseRule,
    qmatrix: &QuantumMatrix,
    theta: f64,
    rng: &mut RandomSource,
) -> BinaryVector {
    let mut mask = match rule {
        CollapseRule::Standard => collapse_standard(qmatrix, rng),
        CollapseRule::Threshold => collapse_threshold(qmatrix, rng, theta),
    };
    mask.repair_empty(rng);
    mask
}

/// Evolve one generation and return the next population (same size).
/// Appends the new best AUC to the island trace.
pub fn evolve_generation(
    population: Vec<SolutionRecord>,
    ctx: &mut IslandContext,
) -> Result<Vec<SolutionRecord>> {
    let next = match ctx.config.variant.style() {
        EvolutionStyle::BinaryDe => evolve_binary_de(population, ctx)?,
        EvolutionStyle::QuantumMutation => evolve_quantum_de(population, ctx, false)?,
        EvolutionStyle::RotationGate => evolve_quantum_de(population, ctx, true)?,
        EvolutionStyle::QieaSweep => evolve_rotation_sweep(population, ctx)?,
    };
    ctx.record_generation(&next);
    Ok(next)
}

fn evolve_binary_de(
    population: Vec<SolutionRecord>,
    ctx: &mut IslandContext,
) -> Result<Vec<SolutionRecord>> {
    let n = ctx.data.n_features();
    let mut trials = Vec::with_capacity(population.len());
    for (index, target) in population.iter().enumerate() {
        let [a, b, c] = pick_donors(population.len(), index, &mut ctx.rng);
        let mutant_values = de_mutation(
            &population[a].mask,
            &population[b].mask,
            &population[c].mask,
            ctx.config.f,
        );
        let mutant_bits = sigmoid_discretize(&mutant_values, &mut ctx.rng);
        let locked = ctx.rng.next_index(n);
        let mut trial_mask =
            binary_crossover(&mutant_bits, &target.mask, ctx.config.cr, locked, &mut ctx.rng);
        trial_mask.repair_empty(&mut ctx.rng);
        let key = ctx.fresh_key();
        trials.push(SolutionRecord::unevaluated(key, trial_mask, None));
    }
    train_and_update(&mut trials, ctx)?;
    population
        .into_iter()
        .zip(trials)
        .map(|(target, trial)| select(target, trial))
        .collect()
}

fn evolve_quantum_de(
    population: Vec<SolutionRecord>,
    ctx: &mut IslandContext,
    use_gate: bool,
) -> Result<Vec<SolutionRecord>> {
    let n = ctx.data.n_features();
    let rule = ctx.config.variant.collapse_rule();
    let best = population[best_index(&population)].clone();
    let mut offspring = Vec::with_capacity(population.len());
    for (index, target) in population.iter().enumerate() {
        let mutant = if use_gate {
            rotate_toward(target, &best, &ctx.config.rotation_table)
        } else {
            let [a, b, c] = pick_donors(population.len(), index, &mut ctx.rng);
            quantum_mutation(
                population[a].qmatrix.as_ref().unwrap(),
                population[b].qmatrix.as_ref().unwrap(),
                population[c].qmatrix.as_ref().unwrap(),
                ctx.config.f,
            )
        };
        let locked = ctx.rng.next_index(n);
        let trial_matrix = quantum_crossover(
            &mutant,
            target.qmatrix.as_ref().unwrap(),
            ctx.config.cr,
            locked,
            &mut ctx.rng,
        );
        let mask = collapse_for(rule, &trial_matrix, ctx.config.theta, &mut ctx.rng);
        let key = ctx.fresh_key();
        offspring.push(SolutionRecord::unevaluated(key, mask, Some(trial_matrix)));
    }
    train_and_update(&mut offspring, ctx)?;
    let keep = population.len();
    let mut merged = population;
    merged.extend(offspring);
    sort_by_fitness(&mut merged);
    merged.truncate(keep);
    Ok(merged)
}

fn evolve_rotation_sweep(
    population: Vec<SolutionRecord>,
    ctx: &mut IslandContext,
) -> Result<Vec<SolutionRecord>> {
    let rule = ctx.config.variant.collapse_rule();
    if ctx.best_so_far.is_none() {
        ctx.refresh_best(&population);
    }
    let best = ctx.best_so_far.clone().expect("population is non-empty");
    let mut offspring = Vec::with_capacity(population.len());
    for target in &population {
        let rotated = rotate_toward(target, &best, &ctx.config.rotation_table);
        let mask = collapse_for(rule, &rotated, ctx.config.theta, &mut ctx.rng);
        let key = ctx.fresh_key();
        offspring.push(SolutionRecord::unevaluated(key, mask, Some(rotated)));
    }
    train_and_update(&mut offspring, ctx)?;
    let keep = population.len();
    let mut merged = population;
    merged.extend(offspring);
    sort_by_fitness(&mut merged);
    merged.truncate(keep);
    ctx.refresh_best(&merged);
    Ok(merged)
}
