//! CSV / JSON-lines export of run artifacts and stream diagnostics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::experiment::{ComboArtifacts, ExperimentReport};
use crate::island::{IslandTrace, MigrationReport, PopulationSnapshot};

/// Write one histogram as CSV: `bin_start,bin_end,count`, one row per bin.
pub fn write_histogram_csv(path: &Path, counts: &[u64]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "bin_start,bin_end,count")?;
    let width = 1.0 / counts.len() as f64;
    for (index, count) in counts.iter().enumerate() {
        writeln!(
            writer,
            "{},{},{}",
            index as f64 * width,
            (index + 1) as f64 * width,
            count
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Write per-island convergence traces:
/// `migration,island,generation,best_auc`.
pub fn write_convergence_csv(path: &Path, traces: &[IslandTrace]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "migration,island,generation,best_auc")?;
    for trace in traces {
        for (generation, best_auc) in trace.best_auc.iter().enumerate() {
            writeln!(
                writer,
                "{},{},{},{}",
                trace.migration, trace.island, generation, best_auc
            )?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Write a post-migration population snapshot: `key,cardinality,auc,mask`.
pub fn write_population_snapshot_csv(path: &Path, snapshot: &PopulationSnapshot) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "key,cardinality,auc,mask")?;
    for member in &snapshot.members {
        writeln!(
            writer,
            "{},{},{},{}",
            member.key,
            member.mask.cardinality(),
            member.auc,
            member.mask.as_bitstring()
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Write migration reports as JSON lines, one report per line.
pub fn write_migration_reports_jsonl(path: &Path, reports: &[MigrationReport]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for report in reports {
        let line = serde_json::to_string(report).expect("migration report serializes");
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(())
}

/// Write the variant summary table as CSV:
/// `variant,classifier,mean_auc,mean_cardinality,mean_test_fitness`.
pub fn write_summary_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(
        writer,
        "variant,classifier,mean_auc,mean_cardinality,mean_test_fitness"
    )?;
    for combo in &report.combos {
        writeln!(
            writer,
            "{},{},{},{},{}",
            combo.variant.name(),
            combo.classifier.name(),
            combo.mean_auc,
            combo.mean_cardinality,
            combo.mean_test_fitness
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Write every run artifact of an experiment under `directory`: per
/// migration a population snapshot, per run a migration-report JSONL and a
/// convergence-trace CSV, plus the summary table.
pub fn export_run_artifacts(
    directory: &Path,
    report: &ExperimentReport,
    artifacts: &[ComboArtifacts],
) -> Result<()> {
    std::fs::create_dir_all(directory)?;
    write_summary_csv(&directory.join("summary.csv"), report)?;
    for combo in artifacts {
        let combo_tag = format!(
            "{}_{}",
            combo.variant.name().to_lowercase().replace('-', "_"),
            combo.classifier.name().to_lowercase()
        );
        for (run, outcome) in combo.outcomes.iter().enumerate() {
            let prefix = format!("{combo_tag}_run{run}");
            write_migration_reports_jsonl(
                &directory.join(format!("{prefix}_migrations.jsonl")),
                &outcome.migration_reports,
            )?;
            write_convergence_csv(
                &directory.join(format!("{prefix}_convergence.csv")),
                &outcome.traces,
            )?;
            for snapshot in &outcome.snapshots {
                write_population_snapshot_csv(
                    &directory.join(format!(
                        "{prefix}_population_mig{}.csv",
                        snapshot.migration
                    )),
                    snapshot,
                )?;
            }
        }
    }
    Ok(())
}
