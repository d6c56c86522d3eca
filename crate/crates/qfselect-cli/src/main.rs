//! Experiment harness CLI.
//!
//! Subcommands: `run` (config file -> report), `synth` (dataset
//! generation), `chaos-diag` (histogram and Lyapunov export), `ttest`
//! (compare two report files).
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use qfselect::chaos::{estimate_lyapunov, histogram, LogisticMapStream, RandomSource};
use qfselect::config::parse_experiment_config;
use qfselect::dataset::{generate_synthetic_dataset, load_dataset, save_csv};
use qfselect::diagnostics::{export_run_artifacts, write_histogram_csv};
use qfselect::experiment::{render_text_table, run_experiment_full, ExperimentReport};
use qfselect::stats::two_sample_t_test;

#[derive(Parser)]
#[command(
    name = "qfselect",
    version,
    about = "Chaotic quantum-inspired feature subset selection harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured experiment and write its report.
    Run {
        /// Flat TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Dataset path, overriding the config file entry.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Where the JSON report is written.
        #[arg(long, default_value = "report.json")]
        output: PathBuf,
        /// Directory for run artifacts (population snapshots, migration
        /// logs, convergence traces, summary CSV).
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark dataset as CSV.
    Synth {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        features: usize,
        /// How many leading features carry the label signal.
        #[arg(long, default_value_t = 5)]
        informative: usize,
        /// Standard deviation of score noise; 0 keeps the task separable.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Export chaotic-vs-uniform histograms and a Lyapunov estimate.
    ChaosDiag {
        /// Logistic-map seed state in (0, 1).
        #[arg(long, default_value_t = 0.413)]
        seed: f64,
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        /// Iterates discarded before sampling.
        #[arg(long, default_value_t = 5000)]
        burn_in: usize,
        /// Seed of the uniform reference stream.
        #[arg(long, default_value_t = 42)]
        uniform_seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Steps used for the Lyapunov-exponent estimate.
        #[arg(long, default_value_t = 1_000_000)]
        horizon: usize,
        /// Directory the CSV files are written into.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Compare the best combinations of two report files.
    Ttest {
        #[arg(long)]
        report_a: PathBuf,
        #[arg(long)]
        report_b: PathBuf,
    },
}

/// Failure paired with the exit code the process should report.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }

    fn data(error: anyhow::Error) -> Self {
        Self { code: 3, error }
    }

    fn runtime(error: anyhow::Error) -> Self {
        Self { code: 4, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            dataset,
            output,
            diagnostics,
        } => run_command(&config, dataset.as_deref(), &output, diagnostics.as_deref()),
        Command::Synth {
            samples,
            features,
            informative,
            noise,
            seed,
            output,
        } => {
            let synthetic = generate_synthetic_dataset(samples, features, informative, noise, seed)
                .map_err(|e| Failure::config(e.into()))?;
            save_csv(&synthetic.data, &output).map_err(|e| Failure::runtime(e.into()))?;
            println!(
                "wrote {} samples x {} features ({} informative: {:?}) to {}",
                samples,
                features,
                informative,
                synthetic.informative,
                output.display()
            );
            Ok(())
        }
        Command::ChaosDiag {
            seed,
            lambda,
            burn_in,
            uniform_seed,
            samples,
            bins,
            horizon,
            output_dir,
        } => chaos_diag_command(
            seed,
            lambda,
            burn_in,
            uniform_seed,
            samples,
            bins,
            horizon,
            &output_dir,
        ),
        Command::Ttest { report_a, report_b } => ttest_command(&report_a, &report_b),
    }
}

fn run_command(
    config_path: &Path,
    dataset_override: Option<&Path>,
    output: &Path,
    diagnostics: Option<&Path>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))
        .map_err(Failure::config)?;
    let mut config = parse_experiment_config(&text).map_err(|e| Failure::config(e.into()))?;
    if let Some(path) = dataset_override {
        config.dataset = Some(path.to_path_buf());
    }
    let dataset_path = config.dataset.clone().ok_or_else(|| {
        Failure::config(anyhow::anyhow!(
            "no dataset: set `dataset` in the config or pass --dataset"
        ))
    })?;

    let data = load_dataset(&dataset_path, config.format)
        .with_context(|| format!("loading {}", dataset_path.display()))
        .map_err(Failure::data)?;

    let (report, artifacts) = run_experiment_full(&config, &data).map_err(|e| match e {
        qfselect::Error::TooFewSamplesPerClass { .. } | qfselect::Error::SingleClassLabels => {
            Failure::data(e.into())
        }
        qfselect::Error::Config(_) => Failure::config(e.into()),
        other => Failure::runtime(other.into()),
    })?;

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(output, json.as_bytes())
        .with_context(|| format!("writing {}", output.display()))
        .map_err(Failure::runtime)?;
    print!("{}", render_text_table(&report));
    println!("report written to {}", output.display());

    if let Some(directory) = diagnostics {
        export_run_artifacts(directory, &report, &artifacts)
            .map_err(|e| Failure::runtime(e.into()))?;
        println!("artifacts written to {}", directory.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn chaos_diag_command(
    seed: f64,
    lambda: f64,
    burn_in: usize,
    uniform_seed: u64,
    samples: usize,
    bins: usize,
    horizon: usize,
    output_dir: &Path,
) -> Result<(), Failure> {
    if bins == 0 {
        return Err(Failure::config(anyhow::anyhow!("--bins must be at least 1")));
    }
    if horizon < 1000 {
        return Err(Failure::config(anyhow::anyhow!(
            "--horizon must be at least 1000 for a stable estimate"
        )));
    }
    let stream = LogisticMapStream::new(seed, lambda, burn_in)
        .map_err(|e| Failure::config(e.into()))?;
    std::fs::create_dir_all(output_dir).map_err(|e| Failure::runtime(e.into()))?;

    let mut chaotic = RandomSource::chaotic(stream);
    let chaotic_counts = histogram((0..samples).map(|_| chaotic.next_f64()), bins);
    write_histogram_csv(&output_dir.join("chaotic_histogram.csv"), &chaotic_counts)
        .map_err(|e| Failure::runtime(e.into()))?;

    let mut uniform = RandomSource::uniform(uniform_seed);
    let uniform_counts = histogram((0..samples).map(|_| uniform.next_f64()), bins);
    write_histogram_csv(&output_dir.join("uniform_histogram.csv"), &uniform_counts)
        .map_err(|e| Failure::runtime(e.into()))?;

    let mut fresh = LogisticMapStream::new(seed, lambda, burn_in)
        .map_err(|e| Failure::config(e.into()))?;
    let exponent = estimate_lyapunov(&mut fresh, horizon);
    std::fs::write(
        output_dir.join("lyapunov.csv"),
        format!("seed,lambda,burn_in,horizon,exponent\n{seed},{lambda},{burn_in},{horizon},{exponent}\n"),
    )
    .map_err(|e| Failure::runtime(e.into()))?;

    println!(
        "lyapunov exponent at lambda {lambda}: {exponent:.4} ({} regime)",
        if exponent > 0.0 { "chaotic" } else { "non-chaotic" }
    );
    println!("histograms written to {}", output_dir.display());
    Ok(())
}

fn load_report(path: &Path) -> Result<ExperimentReport, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading report {}", path.display()))
        .map_err(Failure::data)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing report {}", path.display()))
        .map_err(Failure::data)
}

fn ttest_command(report_a: &Path, report_b: &Path) -> Result<(), Failure> {
    let a = load_report(report_a)?;
    let b = load_report(report_b)?;
    let best = |report: &ExperimentReport, path: &Path| {
        report
            .combos
            .iter()
            .max_by(|x, y| x.mean_auc.total_cmp(&y.mean_auc))
            .cloned()
            .ok_or_else(|| {
                Failure::data(anyhow::anyhow!("report {} has no combinations", path.display()))
            })
    };
    let combo_a = best(&a, report_a)?;
    let combo_b = best(&b, report_b)?;
    let outcome = two_sample_t_test(&combo_a.auc_series(), &combo_b.auc_series())
        .map_err(|e| Failure::data(e.into()))?;
    println!(
        "{:<24} mean_auc {:.3} mean_cardinality {:.2} ({} runs)",
        combo_a.label(),
        combo_a.mean_auc,
        combo_a.mean_cardinality,
        combo_a.runs.len()
    );
    println!(
        "{:<24} mean_auc {:.3} mean_cardinality {:.2} ({} runs)",
        combo_b.label(),
        combo_b.mean_auc,
        combo_b.mean_cardinality,
        combo_b.runs.len()
    );
    println!(
        "t = {:.4}, p = {:.6}, df = {} -> {}",
        outcome.t_statistic,
        outcome.p_value,
        outcome.df,
        if outcome.p_value < 0.05 {
            "statistically different at the 5% level"
        } else {
            "statistically similar at the 5% level"
        }
    );
    Ok(())
}
