//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

use std::process::Command;
use std::time::Instant;

use qfselect::chaos::{
    estimate_lyapunov, LogisticMapStream, RandomSource,
};
use qfselect::classifier::{
    evaluate_auc, prune_by_coefficients, train_model, Standardizer, TrainOptions,
};
use qfselect::config::{AlgorithmConfig, ClassifierKind, Variant};
use qfselect::dataset::{generate_synthetic_dataset, stratified_split};
use qfselect::de::BinaryVector;
use qfselect::engine::{select, SolutionRecord};
use qfselect::island::run_single;
use qfselect::quantum::{
    quantum_crossover, quantum_mutation, QubitPair, QuantumMatrix,
};
use qfselect::stats::two_sample_t_test;

fn pass(criterion: &str) {
    println!("[acceptance] {criterion}: PASS");
}

/// Criterion 1: the first 20 iterates at lambda = 4 match the closed form
/// sin^2(2^t asin(sqrt(d0))) within 1e-6, for 5 seeds, in under a second.
#[test]
fn c01_logistic_map_matches_closed_form() {
    let start = Instant::now();
    for seed in [0.2f64, 0.33, 0.61, 0.77, 0.9] {
        let theta = seed.sqrt().asin();
        let mut stream = LogisticMapStream::new(seed, 4.0, 0).unwrap();
        for t in 1..=20 {
            let value = stream.next_value();
            let expected = (2f64.powi(t) * theta).sin().powi(2);
            assert!(
                (value - expected).abs() < 1e-6,
                "seed {seed}, iterate {t}: {value} vs {expected}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass("criterion 1 (logistic-map closed-form oracle)");
}

/// Criterion 2: Lyapunov estimate at lambda = 4, horizon 1e6, lies in
/// [0.68, 0.71] for 5 generic seeds and is negative at lambda = 2.5,
/// within 5 seconds.
#[test]
fn c02_lyapunov_exponent_detects_chaos() {
    let start = Instant::now();
    for seed in [0.123, 0.2, 0.3, 0.7, 0.9] {
        let mut stream = LogisticMapStream::new(seed, 4.0, 0).unwrap();
        let exponent = estimate_lyapunov(&mut stream, 1_000_000);
        assert!(
            (0.68..=0.71).contains(&exponent),
            "seed {seed}: exponent {exponent}"
        );
    }
    let mut tame = LogisticMapStream::new(0.3, 2.5, 0).unwrap();
    assert!(estimate_lyapunov(&mut tame, 1_000_000) < 0.0);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass("criterion 2 (Lyapunov exponent bounds)");
}

/// Criterion 3: 1e5 random mutation/crossover/rotation compositions never
/// push a column's norm more than 1e-9 from unity.
#[test]
fn c03_quantum_norm_conservation_under_composition() {
    let n = 8;
    let mut rng = RandomSource::uniform(303);
    let random_matrix = |rng: &mut RandomSource| {
        QuantumMatrix::from_columns(
            (0..n)
                .map(|_| {
                    let phi = rng.next_f64() * std::f64::consts::FRAC_PI_2;
                    QubitPair::from_amplitudes(phi.cos(), phi.sin())
                })
                .collect(),
        )
    };
    let mut pool: Vec<QuantumMatrix> = (0..8).map(|_| random_matrix(&mut rng)).collect();
    let mut max_deviation = 0.0f64;
    for step in 0..100_000 {
        let produced = match step % 3 {
            0 => {
                let (a, b, c) = (
                    rng.next_index(pool.len()),
                    rng.next_index(pool.len()),
                    rng.next_index(pool.len()),
                );
                quantum_mutation(&pool[a], &pool[b], &pool[c], rng.next_f64())
            }
            1 => {
                let (a, b) = (rng.next_index(pool.len()), rng.next_index(pool.len()));
                let locked = rng.next_index(n);
                let cr = rng.next_f64();
                quantum_crossover(&pool[a], &pool[b], cr, locked, &mut rng)
            }
            _ => {
                let a = rng.next_index(pool.len());
                let angle = (rng.next_f64() - 0.5) * std::f64::consts::PI;
                QuantumMatrix::from_columns(
                    pool[a].columns().iter().map(|q| q.rotated(angle)).collect(),
                )
            }
        };
        max_deviation = max_deviation.max(produced.max_norm_deviation());
        let slot = rng.next_index(pool.len());
        pool[slot] = produced;
    }
    assert!(
        max_deviation < 1e-9,
        "max norm deviation {max_deviation:e}"
    );
    pass("criterion 3 (norm conservation over 1e5 compositions)");
}

/// Criterion 4: threshold-gated collapse with n = 1000, beta^2 = 0.5,
/// theta = 0.1 selects 50 features on average (band 45..55 over 1e4
/// collapses).
#[test]
fn c04_threshold_trick_cardinality_statistics() {
    let matrix = QuantumMatrix::balanced(1000);
    let mut rng = RandomSource::uniform(404);
    let trials = 10_000;
    let total: usize = (0..trials)
        .map(|_| qfselect::quantum::collapse_threshold(&matrix, &mut rng, 0.1).cardinality())
        .sum();
    let mean = total as f64 / trials as f64;
    assert!((45.0..=55.0).contains(&mean), "mean ones {mean}");
    pass("criterion 4 (threshold-trick statistics)");
}

/// Criterion 5: for every variant, per-island best AUC is non-decreasing
/// across generations and the driver's global best is non-decreasing across
/// migrations — exact comparisons, zero tolerance.
#[test]
fn c05_elitism_for_every_variant() {
    let synthetic = generate_synthetic_dataset(80, 12, 3, 0.5, 505).unwrap();
    let (train, test) = stratified_split(&synthetic.data, 0.8, 505).unwrap();
    for variant in Variant::ALL {
        for classifier in [ClassifierKind::Lr, ClassifierKind::Llr] {
            let config = AlgorithmConfig {
                variant,
                classifier,
                pop_size: 8,
                local_pop: 4,
                max_generations: 4,
                max_migrations: 2,
                islands: 2,
                theta: 0.3,
                seed: 505,
                ..AlgorithmConfig::default()
            };
            let outcome = run_single(&config, &synthetic.data, &train, &test, 505).unwrap();
            for trace in &outcome.traces {
                for window in trace.best_auc.windows(2) {
                    assert!(
                        window[1] >= window[0],
                        "{}+{}: island best decreased {:?}",
                        variant.name(),
                        classifier.name(),
                        trace.best_auc
                    );
                }
            }
            let mut previous = f64::NEG_INFINITY;
            for report in &outcome.migration_reports {
                assert!(report.best_auc_after >= report.best_auc_before);
                assert!(report.best_auc_after >= previous);
                previous = report.best_auc_after;
            }
        }
    }
    pass("criterion 5 (elitism across generations and migrations)");
}

/// Criterion 6: survivor-selection semantics verified by exhaustive
/// enumeration of all order relations, including ties.
#[test]
fn c06_selection_brute_check() {
    let record = |key: u64, auc: f64| SolutionRecord {
        key,
        mask: BinaryVector::from_indices(2, &[0]),
        qmatrix: None,
        model: None,
        auc: Some(auc),
    };
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    for &target in &grid {
        for &trial in &grid {
            let survivor = select(record(0, target), record(1, trial)).unwrap();
            let expected_key = if target > trial { 0 } else { 1 };
            assert_eq!(survivor.key, expected_key, "target {target} trial {trial}");
            assert_eq!(survivor.auc.unwrap(), target.max(trial));
        }
    }
    pass("criterion 6 (selection semantics by enumeration)");
}

/// Criterion 7: AUC metrics equal the rational-arithmetic formulas on 50
/// random confusion matrices, exactly.
#[test]
fn c07_metric_correctness_against_rational_oracle() {
    let mut rng = RandomSource::uniform(707);
    for _ in 0..50 {
        let tp = rng.next_index(40) + 1;
        let fn_ = rng.next_index(40);
        let tn = rng.next_index(40) + 1;
        let fp = rng.next_index(40);

        let mut predictions = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..tp {
            predictions.push(true);
            labels.push(true);
        }
        for _ in 0..fn_ {
            predictions.push(false);
            labels.push(true);
        }
        for _ in 0..tn {
            predictions.push(false);
            labels.push(false);
        }
        for _ in 0..fp {
            predictions.push(true);
            labels.push(false);
        }
        let metrics = evaluate_auc(&predictions, &labels).unwrap();
        assert_eq!(metrics.counts.true_positives, tp);
        assert_eq!(metrics.counts.false_negatives, fn_);
        assert_eq!(metrics.counts.true_negatives, tn);
        assert_eq!(metrics.counts.false_positives, fp);
        // Rational oracle evaluated in f64: identical expressions must agree
        // bit for bit.
        let sensitivity = tp as f64 / (tp + fn_) as f64;
        let specificity = tn as f64 / (tn + fp) as f64;
        assert_eq!(metrics.sensitivity, sensitivity);
        assert_eq!(metrics.specificity, specificity);
        assert_eq!(metrics.auc, (sensitivity + specificity) / 2.0);
    }
    pass("criterion 7 (metric correctness, rational oracle)");
}

fn recovery_config(variant: Variant, classifier: ClassifierKind) -> AlgorithmConfig {
    AlgorithmConfig {
        variant,
        classifier,
        pop_size: 20,
        local_pop: 10,
        max_generations: 10,
        max_migrations: 1,
        islands: 2,
        theta: 0.2,
        ..AlgorithmConfig::default()
    }
}

/// Criterion 8: on a 200 x 50 synthetic task with 5 informative features,
/// the gate variant with lasso recovers test AUC >= 0.90 at cardinality
/// <= 15 on at least 8 of 10 master seeds, within 60 seconds.
#[test]
fn c08_synthetic_recovery_end_to_end() {
    let start = Instant::now();
    let synthetic = generate_synthetic_dataset(200, 50, 5, 0.0, 808).unwrap();
    let (train, test) = stratified_split(&synthetic.data, 0.8, 808).unwrap();
    let config = recovery_config(Variant::ClqbdeII, ClassifierKind::Llr);
    let mut successes = 0;
    for seed in 0..10u64 {
        let outcome = run_single(&config, &synthetic.data, &train, &test, seed).unwrap();
        let top = outcome.top_outcome();
        if top.test_auc >= 0.90 && top.cardinality <= 15 {
            successes += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        successes >= 8,
        "only {successes}/10 seeds recovered the informative subset"
    );
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass("criterion 8 (synthetic recovery end to end)");
}

/// Criterion 9: with the same budget, the threshold-trick variant selects
/// fewer features than plain binary DE on at least 7 of 10 seeds.
#[test]
fn c09_threshold_trick_reduces_cardinality_versus_bde() {
    let synthetic = generate_synthetic_dataset(200, 50, 5, 0.0, 808).unwrap();
    let (train, test) = stratified_split(&synthetic.data, 0.8, 808).unwrap();
    let quantum = recovery_config(Variant::QbdeII, ClassifierKind::Lr);
    let baseline = recovery_config(Variant::Bde, ClassifierKind::Lr);
    let mut wins = 0;
    for seed in 0..10u64 {
        let quantum_top = run_single(&quantum, &synthetic.data, &train, &test, seed)
            .unwrap()
            .top_outcome()
            .cardinality;
        let baseline_top = run_single(&baseline, &synthetic.data, &train, &test, seed)
            .unwrap()
            .top_outcome()
            .cardinality;
        if quantum_top < baseline_top {
            wins += 1;
        }
    }
    assert!(wins >= 7, "threshold trick won only {wins}/10 seeds");
    pass("criterion 9 (ablation: threshold trick shrinks subsets)");
}

/// Criterion 10: two `run` executions with the same config and seed write
/// byte-identical JSON reports.
#[test]
fn c10_cli_run_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let binary = env!("CARGO_BIN_EXE_qfselect");

    let dataset = dir.path().join("synthetic.csv");
    let status = Command::new(binary)
        .args(["synth", "--samples", "120", "--features", "20", "--informative", "4"])
        .args(["--seed", "9", "--output"])
        .arg(&dataset)
        .status()
        .unwrap();
    assert!(status.success());

    let config = dir.path().join("experiment.toml");
    std::fs::write(
        &config,
        format!(
            "dataset = {:?}\nruns = 3\nvariants = [\"bde\", \"clqbde-ii\"]\nclassifier = \"llr\"\n\
             pop_size = 10\nlocal_pop = 5\nmax_generations = 3\nmax_migrations = 2\n\
             islands = 2\ntheta = 0.3\nseed = 77\n",
            dataset.to_str().unwrap()
        ),
    )
    .unwrap();

    let mut reports = Vec::new();
    for tag in ["first", "second"] {
        let output = dir.path().join(format!("report_{tag}.json"));
        let status = Command::new(binary)
            .arg("run")
            .args(["--config"])
            .arg(&config)
            .args(["--output"])
            .arg(&output)
            .status()
            .unwrap();
        assert!(status.success());
        reports.push(std::fs::read(&output).unwrap());
    }
    assert!(!reports[0].is_empty());
    assert_eq!(reports[0], reports[1], "reports differ between executions");
    pass("criterion 10 (byte-identical reports)");
}

/// Regularized incomplete beta via Lentz's continued fraction — the
/// independent textbook implementation for criterion 11.
mod reference_t {
    #[allow(clippy::excessive_precision)]
    fn ln_gamma(x: f64) -> f64 {
        // Lanczos approximation, g = 7, 9 coefficients.
        const COEFFICIENTS: [f64; 8] = [
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        if x < 0.5 {
            let pi = std::f64::consts::PI;
            return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
        }
        let x = x - 1.0;
        let mut accumulator = 0.99999999999980993;
        for (index, &coefficient) in COEFFICIENTS.iter().enumerate() {
            accumulator += coefficient / (x + index as f64 + 1.0);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + accumulator.ln()
    }

    fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
        const MAX_ITERATIONS: usize = 300;
        const EPSILON: f64 = 1e-15;
        const TINY: f64 = 1e-300;
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=MAX_ITERATIONS {
            let m = m as f64;
            let m2 = 2.0 * m;
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPSILON {
                break;
            }
        }
        h
    }

    fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let front =
            (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
        if x < (a + 1.0) / (a + b + 2.0) {
            front * beta_continued_fraction(a, b, x) / a
        } else {
            1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
        }
    }

    /// Textbook pooled two-sample t-test: statistic and two-tailed p-value.
    pub fn pooled_t_test(a: &[f64], b: &[f64]) -> (f64, f64, usize) {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64], m: f64| {
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
        };
        let (ma, mb) = (mean(a), mean(b));
        let df = a.len() + b.len() - 2;
        let pooled = ((a.len() - 1) as f64 * var(a, ma) + (b.len() - 1) as f64 * var(b, mb))
            / df as f64;
        let t = (ma - mb) / (pooled * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
        let nu = df as f64;
        let p = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
        (t, p, df)
    }
}

/// Criterion 11: df = 38 for 20 + 20 samples, and statistic plus p-value
/// agree with the independent textbook implementation to 1e-9 on 100 random
/// pairs.
#[test]
fn c11_t_test_matches_independent_implementation() {
    let mut rng = RandomSource::uniform(1111);
    let sample = |rng: &mut RandomSource, center: f64| -> Vec<f64> {
        (0..20).map(|_| center + (rng.next_f64() - 0.5) * 0.2).collect()
    };
    let fixed = two_sample_t_test(&sample(&mut rng, 0.8), &sample(&mut rng, 0.7)).unwrap();
    assert_eq!(fixed.df, 38);

    for _ in 0..100 {
        let center_a = 0.5 + rng.next_f64() * 0.4;
        let center_b = 0.5 + rng.next_f64() * 0.4;
        let a = sample(&mut rng, center_a);
        let b = sample(&mut rng, center_b);
        let ours = two_sample_t_test(&a, &b).unwrap();
        let (expected_t, expected_p, expected_df) = reference_t::pooled_t_test(&a, &b);
        assert_eq!(ours.df, expected_df);
        assert!(
            (ours.t_statistic - expected_t).abs() < 1e-9,
            "t {} vs {}",
            ours.t_statistic,
            expected_t
        );
        assert!(
            (ours.p_value - expected_p).abs() < 1e-9,
            "p {} vs {}",
            ours.p_value,
            expected_p
        );
    }
    pass("criterion 11 (t-test against independent implementation)");
}

/// Criterion 12: over a 5-point penalty sweep the nonzero-coefficient count
/// is non-increasing, and the largest penalty prunes to the single-bit
/// repair floor.
#[test]
fn c12_lasso_sweep_is_monotone_and_floors_at_one() {
    let synthetic = generate_synthetic_dataset(200, 50, 5, 0.0, 808).unwrap();
    let rows: Vec<usize> = (0..synthetic.data.n_rows()).collect();
    let mask = BinaryVector::from_indices(50, &(0..50).collect::<Vec<_>>());
    let standardizer = Standardizer::fit(&synthetic.data, &rows);
    let mut previous = usize::MAX;
    let mut final_cardinality = None;
    for rate in [0.0, 0.01, 0.1, 1.0, 1e6] {
        let model = train_model(
            &synthetic.data,
            &rows,
            &mask,
            rate * rows.len() as f64,
            &standardizer,
            &TrainOptions::default(),
        )
        .unwrap();
        let nonzero = model.nonzero_count(1e-6);
        assert!(
            nonzero <= previous,
            "nonzero count rose from {previous} to {nonzero} at rate {rate}"
        );
        previous = nonzero;
        final_cardinality = Some(prune_by_coefficients(&mask, &model, 1e-6).cardinality());
    }
    assert_eq!(final_cardinality, Some(1), "repair floor must keep one bit");
    pass("criterion 12 (lasso sweep monotone, repair floor)");
}
