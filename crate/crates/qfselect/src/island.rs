//! Driver/worker island runtime.
//!
//! The driver stratifies the training rows into `k` disjoint islands, hands
//! each island the shared global population, and waits at a migration
//! barrier. Each worker samples a sub-population with replacement, evaluates
//! it on its own data, evolves it for `max_generations` generations, and
//! returns the survivors. The driver then pools all `k * local_pop` records,
//! sorts them by fitness, keeps the top `pop_size`, and starts the next
//! round. After the final migration the retained population is scored once
//! on the untouched test rows.
//!
//! Workers run on their own threads between barriers; each owns its draw
//! source and context, so results are independent of thread scheduling and a
//! `(config, seed)` pair reproduces the final population byte for byte.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::derive_seed;
use crate::classifier::{evaluate_auc, predict_labels};
use crate::config::AlgorithmConfig;
use crate::dataset::LabeledDataset;
use crate::engine::{
    evolve_generation, initialize_population, sort_by_fitness, train_and_update, IslandContext,
    SolutionRecord,
};
use crate::error::{Error, Result};

/// Seed-stream tags used by the driver.
const PARTITION_STREAM: u64 = 3;
const ISLAND_STREAM: u64 = 4;

/// Stratified assignment of training rows to islands, plus per-island seeds.
#[derive(Clone, Debug)]
pub struct IslandPlan {
    pub k: usize,
    /// Disjoint row-index sets covering all training rows; every partition
    /// contains both classes.
    pub partitions: Vec<Vec<usize>>,
    pub seeds: Vec<u64>,
}

/// Split the training rows into `k` stratified, disjoint partitions.
/// Class proportions are preserved within +-1 sample per island.
pub fn partition_data(
    data: &LabeledDataset,
    train_rows: &[usize],
    k: usize,
    seed: u64,
) -> Result<IslandPlan> {
    if k == 0 {
        return Err(Error::Config("island count must be at least 1".into()));
    }
    let mut partitions: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in [false, true] {
        let mut rows: Vec<usize> = train_rows
            .iter()
            .copied()
            .filter(|&row| data.label(row) == class)
            .collect();
        if rows.len() < k {
            return Err(Error::TooFewSamplesPerClass {
                class: class as u8,
                available: rows.len(),
                required: k,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 10 + class as u64));
        rows.shuffle(&mut rng);
        // Chunk sizes differ by at most one; the first `remainder` islands
        // take the extra sample.
        let base = rows.len() / k;
        let remainder = rows.len() % k;
        let mut cursor = 0;
        for (island, partition) in partitions.iter_mut().enumerate() {
            let size = base + usize::from(island < remainder);
            partition.extend_from_slice(&rows[cursor..cursor + size]);
            cursor += size;
        }
    }
    for partition in &mut partitions {
        partition.sort_unstable();
    }
    let seeds = (0..k as u64)
        .map(|island| derive_seed(seed, ISLAND_STREAM + island))
        .collect();
    Ok(IslandPlan {
        k,
        partitions,
        seeds,
    })
}

/// Result of one island's evolution between two barriers.
#[derive(Clone, Debug)]
pub struct WorkerOutput {
    pub island: usize,
    pub records: Vec<SolutionRecord>,
    /// Best island AUC after the initial evaluation and after each
    /// generation; non-decreasing.
    pub trace: Vec<f64>,
}

/// One worker pass: sample `local_pop` records with replacement from the
/// global population (copies of an already-sampled record get fresh keys),
/// train-and-update them on the island rows, then evolve `max_generations`
/// generations.
pub fn worker_run(
    global: &[SolutionRecord],
    data: &LabeledDataset,
    rows: &[usize],
    config: &AlgorithmConfig,
    island_id: u64,
    island_seed: u64,
) -> Result<WorkerOutput> {
    let mut ctx = IslandContext::new(data, rows, config, island_id, island_seed);
    let mut local = Vec::with_capacity(config.local_pop);
    let mut seen = vec![false; global.len()];
    for _ in 0..config.local_pop {
        let index = ctx.rng.next_index(global.len());
        let mut record = global[index].clone();
        if seen[index] {
            record.key = ctx.fresh_key();
        }
        seen[index] = true;
        local.push(record);
    }
    train_and_update(&mut local, &mut ctx)?;
    ctx.record_generation(&local);
    for _ in 0..config.max_generations {
        local = evolve_generation(local, &mut ctx)?;
    }
    Ok(WorkerOutput {
        island: island_id as usize,
        records: local,
        trace: ctx.trace,
    })
}

/// One line of the driver's migration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MigrationReport {
    pub migration: usize,
    /// Pooled record count, `k * local_pop`.
    pub incoming: usize,
    /// Records retained, always `pop_size`.
    pub retained: usize,
    /// Driver-tracked best training AUC entering the barrier.
    pub best_auc_before: f64,
    /// Best training AUC after pooling; never below `best_auc_before`.
    pub best_auc_after: f64,
}

/// Migration policy: pool everything, sort best-first (AUC descending, then
/// cardinality, then key), retain the top `n_keep`, and re-key `0..n_keep`.
pub fn migrate(mut collected: Vec<SolutionRecord>, n_keep: usize) -> Vec<SolutionRecord> {
    sort_by_fitness(&mut collected);
    collected.truncate(n_keep);
    for (index, record) in collected.iter_mut().enumerate() {
        record.key = index as u64;
    }
    collected
}

/// Test-phase scores of one record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub key: u64,
    /// AUC on the island data at training time.
    pub train_auc: f64,
    /// AUC of the stored coefficients on the test rows.
    pub test_auc: f64,
    pub cardinality: usize,
    /// `test_auc * (1 - cardinality / n_features)`.
    pub test_fitness: f64,
}

/// Evaluate the stored coefficients of every record on the test rows.
pub fn test_phase(
    population: &[SolutionRecord],
    data: &LabeledDataset,
    test_rows: &[usize],
    n_features: usize,
) -> Result<Vec<TestOutcome>> {
    let labels: Vec<bool> = test_rows.iter().map(|&row| data.label(row)).collect();
    population
        .iter()
        .map(|record| {
            let model = record
                .model
                .as_ref()
                .ok_or(Error::UnevaluatedSolution(record.key))?;
            let predictions = predict_labels(model, data, test_rows)?;
            let metrics = evaluate_auc(&predictions, &labels)?;
            let cardinality = record.cardinality();
            Ok(TestOutcome {
                key: record.key,
                train_auc: record.fitness()?,
                test_auc: metrics.auc,
                cardinality,
                test_fitness: metrics.auc * (1.0 - cardinality as f64 / n_features as f64),
            })
        })
        .collect()
}

/// Per-island convergence trace for one migration round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IslandTrace {
    pub migration: usize,
    pub island: usize,
    pub best_auc: Vec<f64>,
}

/// Light view of one retained record, stored per migration barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMember {
    pub key: u64,
    pub auc: f64,
    pub mask: crate::de::BinaryVector,
}

/// The retained population right after one migration barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSnapshot {
    pub migration: usize,
    pub members: Vec<SnapshotMember>,
}

impl PopulationSnapshot {
    fn capture(migration: usize, population: &[SolutionRecord]) -> Self {
        Self {
            migration,
            members: population
                .iter()
                .map(|record| SnapshotMember {
                    key: record.key,
                    auc: record.auc.unwrap_or(f64::NAN),
                    mask: record.mask.clone(),
                })
                .collect(),
        }
    }
}

/// Everything produced by one full run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Final population after the last migration, keys `0..pop_size`.
    pub population: Vec<SolutionRecord>,
    /// Test-phase scores, aligned with `population`.
    pub outcomes: Vec<TestOutcome>,
    /// Index into `outcomes` of the top solution (highest test AUC, ties by
    /// lower cardinality then lower key).
    pub top: usize,
    pub migration_reports: Vec<MigrationReport>,
    pub traces: Vec<IslandTrace>,
    /// Retained population after each migration barrier.
    pub snapshots: Vec<PopulationSnapshot>,
}

impl RunOutcome {
    pub fn top_outcome(&self) -> &TestOutcome {
        &self.outcomes[self.top]
    }
}

/// Execute one full run: initialize, evolve islands through
/// `max_migrations` barriers, then score the survivors on the test rows.
pub fn run_single(
    config: &AlgorithmConfig,
    data: &LabeledDataset,
    train_rows: &[usize],
    test_rows: &[usize],
    run_seed: u64,
) -> Result<RunOutcome> {
    config.validate()?;
    let mut population = initialize_population(config, data.n_features(), run_seed)?;
    let plan = partition_data(
        data,
        train_rows,
        config.islands,
        derive_seed(run_seed, PARTITION_STREAM),
    )?;
    let island_seeds: Vec<u64> = match &config.island_seeds {
        Some(seeds) => seeds.clone(),
        None => plan.seeds.clone(),
    };

    let mut migration_reports = Vec::with_capacity(config.max_migrations);
    let mut traces = Vec::new();
    let mut snapshots = Vec::with_capacity(config.max_migrations);
    // Initial records carry no evaluated fitness; the driver's running best
    // starts from the AUC floor.
    let mut global_best = 0.0f64;
    for migration in 0..config.max_migrations {
        let round_seeds: Vec<u64> = island_seeds
            .iter()
            .map(|&seed| derive_seed(seed, migration as u64))
            .collect();
        let outputs = run_workers(&population, data, &plan, config, &round_seeds)?;

        let mut collected = Vec::with_capacity(plan.k * config.local_pop);
        for output in outputs {
            traces.push(IslandTrace {
                migration,
                island: output.island,
                best_auc: output.trace,
            });
            collected.extend(output.records);
        }
        let incoming = collected.len();
        let pool_best = collected
            .iter()
            .filter_map(|record| record.auc)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_auc_before = global_best;
        global_best = global_best.max(pool_best);
        population = migrate(collected, config.pop_size);
        snapshots.push(PopulationSnapshot::capture(migration, &population));
        migration_reports.push(MigrationReport {
            migration,
            incoming,
            retained: population.len(),
            best_auc_before,
            best_auc_after: global_best,
        });
    }

    let outcomes = test_phase(&population, data, test_rows, data.n_features())?;
    let top = pick_top(&outcomes);
    Ok(RunOutcome {
        population,
        outcomes,
        top,
        migration_reports,
        traces,
        snapshots,
    })
}

/// Run every island worker for one round. Islands execute on their own
/// threads; outputs are collected in island order so scheduling never
/// affects the result.
fn run_workers(
    population: &[SolutionRecord],
    data: &LabeledDataset,
    plan: &IslandPlan,
    config: &AlgorithmConfig,
    round_seeds: &[u64],
) -> Result<Vec<WorkerOutput>> {
    if plan.k == 1 {
        return Ok(vec![worker_run(
            population,
            data,
            &plan.partitions[0],
            config,
            0,
            round_seeds[0],
        )?]);
    }
    let results: Vec<Result<WorkerOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..plan.k)
            .map(|island| {
                let rows = &plan.partitions[island];
                let seed = round_seeds[island];
                scope.spawn(move || {
                    worker_run(population, data, rows, config, island as u64, seed)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("island worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Top solution by test AUC; ties broken by lower cardinality, then key.
fn pick_top(outcomes: &[TestOutcome]) -> usize {
    let mut top = 0;
    for index in 1..outcomes.len() {
        let better = outcomes[index]
            .test_auc
            .total_cmp(&outcomes[top].test_auc)
            .then_with(|| outcomes[top].cardinality.cmp(&outcomes[index].cardinality))
            .then_with(|| outcomes[top].key.cmp(&outcomes[index].key));
        if better.is_gt() {
            top = index;
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ClassifierKind, Variant};
    use crate::dataset::generate_synthetic_dataset;
    use crate::de::BinaryVector;

    fn toy_config() -> AlgorithmConfig {
        AlgorithmConfig {
            variant: Variant::ClqbdeII,
            classifier: ClassifierKind::Llr,
            pop_size: 8,
            local_pop: 4,
            max_generations: 3,
            max_migrations: 2,
            islands: 2,
            theta: 0.3,
            ..AlgorithmConfig::default()
        }
    }

    #[test]
    fn single_island_partition_holds_everything() {
        let synthetic = generate_synthetic_dataset(40, 5, 2, 0.0, 1).unwrap();
        let rows: Vec<usize> = (0..40).collect();
        let plan = partition_data(&synthetic.data, &rows, 1, 9).unwrap();
        assert_eq!(plan.partitions.len(), 1);
        assert_eq!(plan.partitions[0], rows);
    }

    #[test]
    fn partitions_are_disjoint_and_stratified() {
        // 100 rows, 30 positive, k = 4: each island gets 7 or 8 positives.
        let labels: Vec<bool> = (0..100).map(|i| i < 30).collect();
        let data = crate::dataset::LabeledDataset::from_dense(vec![0.0; 100], 1, labels, None);
        let rows: Vec<usize> = (0..100).collect();
        let plan = partition_data(&data, &rows, 4, 17).unwrap();

        let total: usize = plan.partitions.iter().map(Vec::len).sum();
        assert_eq!(total, 100);
        let mut all: Vec<usize> = plan.partitions.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, rows, "partitions must cover every row exactly once");

        for partition in &plan.partitions {
            let positives = partition.iter().filter(|&&row| data.label(row)).count();
            assert!(positives == 7 || positives == 8, "positives {positives}");
        }
    }

    #[test]
    fn partition_rejects_classes_smaller_than_island_count() {
        let labels: Vec<bool> = (0..10).map(|i| i < 2).collect();
        let data = crate::dataset::LabeledDataset::from_dense(vec![0.0; 10], 1, labels, None);
        let rows: Vec<usize> = (0..10).collect();
        assert!(matches!(
            partition_data(&data, &rows, 3, 0),
            Err(Error::TooFewSamplesPerClass { .. })
        ));
    }

    #[test]
    fn worker_returns_local_pop_records_and_is_deterministic() {
        let synthetic = generate_synthetic_dataset(60, 8, 3, 0.0, 2).unwrap();
        let rows: Vec<usize> = (0..60).collect();
        let config = toy_config();
        let evaluated = initialize_population(&config, 8, 5).unwrap();
        let a = worker_run(&evaluated, &synthetic.data, &rows, &config, 0, 99).unwrap();
        assert_eq!(a.records.len(), config.local_pop);

        let b = worker_run(&evaluated, &synthetic.data, &rows, &config, 0, 99).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.key, y.key);
            assert_eq!(x.mask, y.mask);
            assert_eq!(x.auc, y.auc);
        }
        assert_eq!(a.trace, b.trace);

        // mGen = 0: the evaluated initial sample comes back unchanged.
        let config_frozen = AlgorithmConfig {
            max_generations: 0,
            ..config
        };
        let frozen = worker_run(&evaluated, &synthetic.data, &rows, &config_frozen, 0, 99).unwrap();
        assert_eq!(frozen.records.len(), config_frozen.local_pop);
        assert_eq!(frozen.trace.len(), 1);
        assert!(frozen.records.iter().all(|record| record.auc.is_some()));
    }

    #[test]
    fn worker_sampling_keeps_keys_unique() {
        let synthetic = generate_synthetic_dataset(60, 8, 3, 0.0, 2).unwrap();
        let rows: Vec<usize> = (0..60).collect();
        let config = AlgorithmConfig {
            local_pop: 8,
            max_generations: 0,
            ..toy_config()
        };
        // Tiny global pool forces duplicate sampling.
        let global = initialize_population(
            &AlgorithmConfig {
                pop_size: 2,
                local_pop: 2,
                ..config.clone()
            },
            8,
            5,
        )
        .unwrap();
        let output = worker_run(&global, &synthetic.data, &rows, &config, 3, 7).unwrap();
        let mut keys: Vec<u64> = output.records.iter().map(|record| record.key).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), config.local_pop, "duplicate keys after sampling");
    }

    #[test]
    fn migrate_sorts_and_rekeys() {
        let record = |key: u64, auc: f64, bits: &[usize]| SolutionRecord {
            key,
            mask: BinaryVector::from_indices(6, bits),
            qmatrix: None,
            model: None,
            auc: Some(auc),
        };
        let collected = vec![
            record(10, 0.9, &[0]),
            record(11, 0.5, &[0, 1]),
            record(12, 0.5, &[0]),
            record(20, 0.8, &[1]),
            record(21, 0.7, &[2]),
            record(22, 0.6, &[3]),
        ];
        let migrated = migrate(collected, 4);
        let aucs: Vec<f64> = migrated.iter().map(|r| r.auc.unwrap()).collect();
        assert_eq!(aucs, vec![0.9, 0.8, 0.7, 0.6]);
        let keys: Vec<u64> = migrated.iter().map(|r| r.key).collect();
        assert_eq!(keys, vec![0, 1, 2, 3]);

        // k = 1, local_pop = n_keep: migration is a pure sort.
        let sorted = migrate(
            vec![record(0, 0.5, &[0]), record(1, 0.9, &[1])],
            2,
        );
        assert_eq!(sorted[0].auc, Some(0.9));

        // Equal AUC: lower cardinality wins.
        let tie = migrate(
            vec![record(0, 0.5, &[0, 1, 2]), record(1, 0.5, &[3])],
            1,
        );
        assert_eq!(tie[0].cardinality(), 1);
    }

    #[test]
    fn test_phase_applies_the_fitness_formula() {
        let synthetic = generate_synthetic_dataset(50, 10, 2, 0.0, 3).unwrap();
        let (train, test) = crate::dataset::stratified_split(&synthetic.data, 0.8, 1).unwrap();
        let config = AlgorithmConfig {
            islands: 1,
            max_migrations: 1,
            ..toy_config()
        };
        let outcome = run_single(&config, &synthetic.data, &train, &test, 12).unwrap();
        for result in &outcome.outcomes {
            assert!((0.0..=1.0).contains(&result.test_auc));
            let expected = result.test_auc * (1.0 - result.cardinality as f64 / 10.0);
            assert!((result.test_fitness - expected).abs() < 1e-12);
        }
        // Full-cardinality record would have zero fitness.
        let top = outcome.top_outcome();
        assert!(top.test_auc >= outcome.outcomes.iter().map(|o| o.test_auc).fold(0.0, f64::max));
    }

    #[test]
    fn unevaluated_population_fails_test_phase() {
        let synthetic = generate_synthetic_dataset(50, 10, 2, 0.0, 3).unwrap();
        let rows: Vec<usize> = (0..50).collect();
        let raw = vec![SolutionRecord::unevaluated(
            0,
            BinaryVector::from_indices(10, &[0]),
            None,
        )];
        assert!(matches!(
            test_phase(&raw, &synthetic.data, &rows, 10),
            Err(Error::UnevaluatedSolution(0))
        ));
    }

    #[test]
    fn global_best_never_decreases_across_migrations() {
        let synthetic = generate_synthetic_dataset(80, 10, 3, 0.5, 4).unwrap();
        let (train, test) = crate::dataset::stratified_split(&synthetic.data, 0.8, 2).unwrap();
        let config = AlgorithmConfig {
            max_migrations: 3,
            ..toy_config()
        };
        let outcome = run_single(&config, &synthetic.data, &train, &test, 21).unwrap();
        assert_eq!(outcome.migration_reports.len(), 3);
        let mut previous = 0.0;
        for report in &outcome.migration_reports {
            assert_eq!(report.retained, config.pop_size);
            assert_eq!(report.incoming, config.islands * config.local_pop);
            assert_eq!(report.best_auc_before, previous);
            assert!(report.best_auc_after >= report.best_auc_before);
            previous = report.best_auc_after;
        }
        for trace in &outcome.traces {
            for window in trace.best_auc.windows(2) {
                assert!(window[1] >= window[0], "island trace decreased");
            }
        }
    }

    #[test]
    fn explicit_island_seeds_are_honored() {
        let synthetic = generate_synthetic_dataset(70, 12, 3, 0.3, 6).unwrap();
        let (train, test) = crate::dataset::stratified_split(&synthetic.data, 0.8, 5).unwrap();
        let config = AlgorithmConfig {
            island_seeds: Some(vec![901, 902]),
            ..toy_config()
        };
        let first = run_single(&config, &synthetic.data, &train, &test, 33).unwrap();
        let second = run_single(&config, &synthetic.data, &train, &test, 33).unwrap();
        assert_eq!(
            serde_json::to_string(&first.outcomes).unwrap(),
            serde_json::to_string(&second.outcomes).unwrap()
        );
        // Different explicit seeds change the search trajectory.
        let other_config = AlgorithmConfig {
            island_seeds: Some(vec![11, 12]),
            ..toy_config()
        };
        let other = run_single(&other_config, &synthetic.data, &train, &test, 33).unwrap();
        assert_ne!(
            serde_json::to_string(&first.outcomes).unwrap(),
            serde_json::to_string(&other.outcomes).unwrap()
        );

        // Seed count must match the island count.
        let mismatched = AlgorithmConfig {
            island_seeds: Some(vec![1]),
            ..toy_config()
        };
        assert!(run_single(&mismatched, &synthetic.data, &train, &test, 33).is_err());
    }

    #[test]
    fn run_single_is_deterministic() {
        let synthetic = generate_synthetic_dataset(70, 12, 3, 0.3, 6).unwrap();
        let (train, test) = crate::dataset::stratified_split(&synthetic.data, 0.8, 5).unwrap();
        let config = toy_config();
        let first = run_single(&config, &synthetic.data, &train, &test, 33).unwrap();
        let second = run_single(&config, &synthetic.data, &train, &test, 33).unwrap();
        let serialize = |outcome: &RunOutcome| {
            serde_json::to_string(&(
                &outcome.population,
                &outcome.outcomes,
                &outcome.migration_reports,
                &outcome.traces,
            ))
            .unwrap()
        };
        assert_eq!(serialize(&first), serialize(&second));
    }
}
