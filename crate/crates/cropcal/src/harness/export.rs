//! File outputs: CSV tables and JSON dumps, each prefixed with a
//! reproducibility header carrying the resolved configuration and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::core::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::experiment::{CalibrationOutcome, CompareReport, TrajectoryBundle};

/// Comment lines (prefixed `#`) embedding the root seed and the full
/// resolved configuration; present at the top of every output file.
pub fn reproducibility_header(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_string(config)?;
    Ok(format!("# seed: {}\n# config: {}\n", config.seed, json))
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn metrics_rows(outcomes: &[&CalibrationOutcome], out: &mut String) {
    out.push_str(
        "algorithm,variety,mode,run,tavg,rain,assim_mse,assim_mae,assim_rmse,assim_correlation,wofost_mse,wofost_mae,wofost_rmse,wofost_correlation\n",
    );
    for o in outcomes {
        let a = &o.assimilation_metrics;
        let w = &o.wofost_metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            o.algorithm,
            csv_field(&o.variety),
            o.mode,
            o.run_index,
            o.best_genome[0],
            o.best_genome[1],
            a.mse,
            a.mae,
            a.rmse,
            a.correlation,
            w.mse,
            w.mae,
            w.rmse,
            w.correlation
        );
    }
}

pub fn export_metrics_csv(
    path: &Path,
    config: &ExperimentConfig,
    outcomes: &[CalibrationOutcome],
) -> Result<()> {
    let mut out = reproducibility_header(config)?;
    metrics_rows(&outcomes.iter().collect::<Vec<_>>(), &mut out);
    fs::write(path, out)?;
    Ok(())
}

/// JSON dump of a calibration outcome; re-importable with serde.
pub fn export_metrics_json(
    path: &Path,
    config: &ExperimentConfig,
    outcome: &CalibrationOutcome,
) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Document<'a> {
        seed: u64,
        config: &'a ExperimentConfig,
        result: &'a CalibrationOutcome,
    }
    let doc = Document {
        seed: config.seed,
        config,
        result: outcome,
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Columns: generation, best objective so far.
pub fn export_convergence_csv(
    path: &Path,
    config: &ExperimentConfig,
    history: &[f64],
) -> Result<()> {
    let mut out = reproducibility_header(config)?;
    out.push_str("generation,best_fitness\n");
    for (g, f) in history.iter().enumerate() {
        let _ = writeln!(out, "{},{}", g + 1, f);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Columns: day, simulated, assimilated, observed (blank off observation
/// days), target. One non-comment line per day plus the column header.
pub fn export_trajectory_csv(
    path: &Path,
    config: &ExperimentConfig,
    t: &TrajectoryBundle,
) -> Result<()> {
    let mut out = reproducibility_header(config)?;
    out.push_str("day,simulated,assimilated,observed,target\n");
    for day in 0..t.target.len() {
        let observed = t.observed[day].map(|y| y.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            day, t.simulated[day], t.assimilated[day], observed, t.target[day]
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Per-cell metric rows for a comparison matrix.
pub fn export_compare_csv(
    path: &Path,
    config: &ExperimentConfig,
    report: &CompareReport,
) -> Result<()> {
    let mut out = reproducibility_header(config)?;
    let outcomes: Vec<&CalibrationOutcome> = report.cells.iter().map(|c| &c.outcome).collect();
    metrics_rows(&outcomes, &mut out);
    fs::write(path, out)?;
    Ok(())
}

/// Run summaries and rank-sum comparisons for a comparison matrix.
pub fn export_summary_csv(
    path: &Path,
    config: &ExperimentConfig,
    report: &CompareReport,
) -> Result<()> {
    let mut out = reproducibility_header(config)?;
    out.push_str("kind,algorithm,mean,median,std,statistic,p_value\n");
    for s in &report.summaries {
        let _ = writeln!(
            out,
            "summary,{},{},{},{},,",
            s.algorithm, s.rmse.mean, s.rmse.median, s.rmse.std
        );
    }
    for w in &report.wilcoxon {
        let _ = writeln!(
            out,
            "wilcoxon,{},,,,{},{}",
            w.baseline, w.result.statistic, w.result.p_value
        );
    }
    fs::write(path, out)?;
    Ok(())
}
