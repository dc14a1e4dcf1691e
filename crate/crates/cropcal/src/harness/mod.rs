//! Experiment orchestration: configuration, calibration runs, comparison
//! matrices, worked-example verification, and file export.

mod config;
mod experiment;
mod export;

pub use config::{Algorithm, ExperimentConfig, Mode, OptimizerSettings, OutputFormat};
pub use experiment::{
    appendix_check, appendix_check_with, assimilation_preview, calibrate, calibrate_cell,
    compare, AlgorithmSummary,
    AppendixReport, CalibrationOutcome, CompareCell, CompareReport, TrajectoryBundle,
    WilcoxonComparison, APPENDIX_FORECAST, APPENDIX_OBSERVATIONS, APPENDIX_R,
};
pub use export::{
    export_compare_csv, export_convergence_csv, export_metrics_csv, export_metrics_json,
    export_summary_csv, export_trajectory_csv, reproducibility_header,
};
