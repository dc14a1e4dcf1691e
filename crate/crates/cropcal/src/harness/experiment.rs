//! Calibration runs, comparison matrices, and the worked-example check.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::baselines::{de_optimize, ga_optimize, hho_optimize, pso_optimize};
use crate::core::{
    derive_stream_id, Bounds, Error, Objective, OptimizeResult, Result, RngStream,
};
use crate::demmogc;
use crate::enkf::{assimilate_season, single_step_update, EnkfConfig};
use crate::harness::config::{Algorithm, ExperimentConfig, Mode, OptimizerSettings};
use crate::metrics::{mse, summarize_runs, wilcoxon_rank_sum, MetricReport, RunSummary, TestResult};
use crate::wofost::{
    constant_weather, simulate_season, CropVariety, DailyWeather, Trajectory, INITIAL_LAI,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryBundle {
    pub target: Trajectory,
    pub simulated: Trajectory,
    pub assimilated: Trajectory,
    pub observed: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub algorithm: Algorithm,
    pub variety: String,
    pub mode: Mode,
    pub run_index: u32,
    pub seed: u64,
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far objective after each generation.
    pub history: Vec<f64>,
    /// Errors of the filter-corrected trajectory at the best genome.
    pub assimilation_metrics: MetricReport,
    /// Errors of the free-running model trajectory at the best genome.
    pub wofost_metrics: MetricReport,
    pub trajectories: TrajectoryBundle,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

// Wall time is measurement noise, not part of the result identity.
impl PartialEq for CalibrationOutcome {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.variety == other.variety
            && self.mode == other.mode
            && self.run_index == other.run_index
            && self.seed == other.seed
            && self.best_genome == other.best_genome
            && self.best_fitness == other.best_fitness
            && self.history == other.history
            && self.assimilation_metrics == other.assimilation_metrics
            && self.wofost_metrics == other.wofost_metrics
            && self.trajectories == other.trajectories
    }
}

fn jittered_weather(
    variety: &CropVariety,
    tavg: f64,
    rain_total: f64,
    jitter: f64,
    days: usize,
    rng: &mut impl Rng,
) -> Result<Vec<DailyWeather>> {
    if jitter == 0.0 {
        return Ok(constant_weather(variety, tavg, rain_total, days));
    }
    let rain_daily = rain_total / days as f64;
    let tavg_noise = Normal::new(0.0, jitter * tavg.abs())
        .map_err(|e| Error::Config(format!("temperature jitter: {e}")))?;
    let rain_noise = Normal::new(0.0, jitter * rain_daily)
        .map_err(|e| Error::Config(format!("rain jitter: {e}")))?;
    Ok((0..days)
        .map(|_| DailyWeather {
            tavg: tavg + tavg_noise.sample(rng),
            rain: (rain_daily + rain_noise.sample(rng)).max(0.0),
            irrad: variety.irrad,
        })
        .collect())
}

/// Ground-truth series for one cell: midpoint weather unless the config
/// pins a known genome, with seeded day-to-day jitter.
fn build_target(
    config: &ExperimentConfig,
    variety: &CropVariety,
    run_index: u32,
) -> Result<Trajectory> {
    let stream = derive_stream_id(&["target", &variety.name], run_index);
    let mut rng = RngStream::new(config.seed).with_stream(stream).rng();
    let [tavg, rain] = config.target_genome.unwrap_or([
        variety.tavg_midpoint(),
        variety.rain_midpoint(),
    ]);
    let weather = jittered_weather(
        variety,
        tavg,
        rain,
        config.target_jitter,
        config.days,
        &mut rng,
    )?;
    simulate_season(variety, &weather, INITIAL_LAI)
}

/// Objective over a (TAVG, seasonal RAIN) genome. The filter-noise stream
/// is reset for every evaluation, freezing one noise realization per run
/// so the objective is a deterministic function of the genome.
struct CalibrationProblem<'a> {
    variety: &'a CropVariety,
    target: &'a Trajectory,
    mode: Mode,
    enkf: &'a EnkfConfig,
    days: usize,
    noise: RngStream,
}

impl CalibrationProblem<'_> {
    fn trajectories(&self, genome: &[f64]) -> Result<TrajectoryBundle> {
        let weather = constant_weather(self.variety, genome[0], genome[1], self.days);
        let result = assimilate_season(
            self.variety,
            &weather,
            self.target,
            self.enkf,
            &mut self.noise.rng(),
        )?;
        Ok(TrajectoryBundle {
            target: self.target.clone(),
            simulated: result.simulated,
            assimilated: result.assimilated,
            observed: result.observed,
        })
    }
}

impl Objective for CalibrationProblem<'_> {
    fn evaluate(&self, genome: &[f64]) -> Result<f64> {
        match self.mode {
            Mode::Assimilation => {
                let bundle = self.trajectories(genome)?;
                mse(self.target, &bundle.assimilated)
            }
            Mode::WofostOnly => {
                let weather = constant_weather(self.variety, genome[0], genome[1], self.days);
                let simulated = simulate_season(self.variety, &weather, self.target[0])?;
                mse(self.target, &simulated)
            }
        }
    }
}

fn run_optimizer(
    algorithm: Algorithm,
    settings: &OptimizerSettings,
    objective: &dyn Objective,
    bounds: &Bounds,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    match algorithm {
        Algorithm::Demmogc => demmogc::optimize(objective, bounds, &settings.demmogc, rng),
        Algorithm::De => de_optimize(objective, bounds, &settings.de, rng),
        Algorithm::Ga => ga_optimize(objective, bounds, &settings.ga, rng),
        Algorithm::Pso => pso_optimize(objective, bounds, &settings.pso, rng),
        Algorithm::Hho => hho_optimize(objective, bounds, &settings.hho, rng),
    }
}

/// One calibration cell: derive the target, optimize the weather genome,
/// report metrics for both trajectory kinds at the best genome.
pub fn calibrate_cell(
    config: &ExperimentConfig,
    algorithm: Algorithm,
    variety_name: &str,
    run_index: u32,
) -> Result<CalibrationOutcome> {
    let start = Instant::now();
    let variety = config.resolve_variety(variety_name)?;
    variety.validate()?;
    let target = build_target(config, &variety, run_index)?;
    let noise_stream = derive_stream_id(&["noise", &variety.name], run_index);
    let problem = CalibrationProblem {
        variety: &variety,
        target: &target,
        mode: config.mode,
        enkf: &config.enkf,
        days: config.days,
        noise: RngStream::new(config.seed).with_stream(noise_stream),
    };
    let optimizer_stream =
        derive_stream_id(&["optimizer", algorithm.id(), &variety.name], run_index);
    let mut rng = RngStream::new(config.seed).with_stream(optimizer_stream).rng();
    let bounds = variety.calibration_bounds();
    let result = run_optimizer(algorithm, &config.optimizer, &problem, &bounds, &mut rng)?;

    let trajectories = problem.trajectories(&result.best.genome)?;
    let assimilation_metrics = MetricReport::compute(&target, &trajectories.assimilated)?;
    let wofost_metrics = MetricReport::compute(&target, &trajectories.simulated)?;

    Ok(CalibrationOutcome {
        algorithm,
        variety: variety.name.clone(),
        mode: config.mode,
        run_index,
        seed: config.seed,
        best_genome: result.best.genome.clone(),
        best_fitness: result.best.score(),
        history: result.history,
        assimilation_metrics,
        wofost_metrics,
        trajectories,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Single calibration using the algorithm, variety, and first run index
/// from the config.
pub fn calibrate(config: &ExperimentConfig) -> Result<CalibrationOutcome> {
    config.validate()?;
    calibrate_cell(config, config.algorithm, &config.variety, 0)
}

/// Target, free-run, and assimilated trajectories at the reference weather
/// genome, without any optimization.
pub fn assimilation_preview(config: &ExperimentConfig) -> Result<TrajectoryBundle> {
    config.validate()?;
    let variety = config.resolve_variety(&config.variety)?;
    let target = build_target(config, &variety, 0)?;
    let noise_stream = derive_stream_id(&["noise", &variety.name], 0);
    let problem = CalibrationProblem {
        variety: &variety,
        target: &target,
        mode: config.mode,
        enkf: &config.enkf,
        days: config.days,
        noise: RngStream::new(config.seed).with_stream(noise_stream),
    };
    let genome = config.target_genome.unwrap_or([
        variety.tavg_midpoint(),
        variety.rain_midpoint(),
    ]);
    problem.trajectories(&genome)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CompareCell {
    pub algorithm: Algorithm,
    pub variety: String,
    pub run_index: u32,
    pub outcome: CalibrationOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Summary of assimilated-trajectory RMSE over every run and variety.
    pub rmse: RunSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WilcoxonComparison {
    pub baseline: Algorithm,
    pub result: TestResult,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CompareReport {
    pub cells: Vec<CompareCell>,
    pub summaries: Vec<AlgorithmSummary>,
    /// Rank-sum tests of the multi-mutation optimizer's RMSE samples
    /// against each other algorithm present in the matrix.
    pub wilcoxon: Vec<WilcoxonComparison>,
}

/// Run every (algorithm, variety, run) cell with derived seeds; cells are
/// independent and run in parallel when enabled.
pub fn compare(
    config: &ExperimentConfig,
    algorithms: &[Algorithm],
    varieties: &[String],
) -> Result<CompareReport> {
    config.validate()?;
    if algorithms.is_empty() || varieties.is_empty() {
        return Err(Error::Config(
            "comparison needs at least one algorithm and one variety".into(),
        ));
    }
    for name in varieties {
        config.resolve_variety(name)?;
    }
    let mut jobs: Vec<(Algorithm, String, u32)> = Vec::new();
    for &algorithm in algorithms {
        for variety in varieties {
            for run in 0..config.runs as u32 {
                jobs.push((algorithm, variety.clone(), run));
            }
        }
    }

    let run_job = |(algorithm, variety, run): &(Algorithm, String, u32)| -> Result<CompareCell> {
        let outcome = calibrate_cell(config, *algorithm, variety, *run)?;
        Ok(CompareCell {
            algorithm: *algorithm,
            variety: variety.clone(),
            run_index: *run,
            outcome,
        })
    };

    #[cfg(feature = "parallel")]
    let cells: Result<Vec<CompareCell>> = if config.parallel {
        jobs.par_iter().map(run_job).collect()
    } else {
        jobs.iter().map(run_job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cells: Result<Vec<CompareCell>> = jobs.iter().map(run_job).collect();
    let cells = cells?;

    let rmse_samples = |algorithm: Algorithm| -> Vec<f64> {
        cells
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .map(|c| c.outcome.assimilation_metrics.rmse)
            .collect()
    };
    let mut summaries = Vec::new();
    for &algorithm in algorithms {
        summaries.push(AlgorithmSummary {
            algorithm,
            rmse: summarize_runs(&rmse_samples(algorithm))?,
        });
    }
    let mut wilcoxon = Vec::new();
    if algorithms.contains(&Algorithm::Demmogc) {
        let ours = rmse_samples(Algorithm::Demmogc);
        for &baseline in algorithms.iter().filter(|&&a| a != Algorithm::Demmogc) {
            wilcoxon.push(WilcoxonComparison {
                baseline,
                result: wilcoxon_rank_sum(&ours, &rmse_samples(baseline))?,
            });
        }
    }

    Ok(CompareReport {
        cells,
        summaries,
        wilcoxon,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AppendixAssertion {
    pub name: String,
    pub expected: Vec<f64>,
    pub actual: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AppendixReport {
    pub assertions: Vec<AppendixAssertion>,
}

impl AppendixReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

pub const APPENDIX_FORECAST: [f64; 5] = [0.6, 0.65, 0.7, 0.75, 0.8];
pub const APPENDIX_OBSERVATIONS: [f64; 5] = [0.72, 0.67, 0.68, 0.65, 0.70];
pub const APPENDIX_R: f64 = 0.01;

/// Run the five-member worked example with injectable fixtures; a gain
/// override exercises fault detection downstream of the gain.
pub fn appendix_check_with(
    forecast: &[f64],
    observations: &[f64],
    r: f64,
    gain_override: Option<f64>,
) -> Result<AppendixReport> {
    let diag = single_step_update(forecast, observations, 1.0, r)?;
    let (gain, updated, updated_mean) = match gain_override {
        None => (diag.gain, diag.updated, diag.updated_mean),
        Some(g) => {
            let updated = crate::enkf::update(forecast, observations, g, 1.0)?;
            let mean = crate::enkf::ensemble_mean(&updated)?;
            (g, updated, mean)
        }
    };

    let assertion = |name: &str, expected: Vec<f64>, actual: Vec<f64>, tolerance: f64| {
        let passed = expected
            .iter()
            .zip(&actual)
            .all(|(e, a)| (e - a).abs() <= tolerance);
        AppendixAssertion {
            name: name.to_string(),
            expected,
            actual,
            tolerance,
            passed,
        }
    };

    Ok(AppendixReport {
        assertions: vec![
            assertion("forecast mean", vec![0.7], vec![diag.forecast_mean], 1e-12),
            assertion("covariance", vec![0.00625], vec![diag.covariance], 1e-6),
            assertion("kalman gain", vec![0.3846], vec![gain], 1e-4),
            assertion(
                "updated ensemble",
                vec![0.6462, 0.6577, 0.6923, 0.7115, 0.7615],
                updated,
                1e-3,
            ),
            assertion("updated mean", vec![0.6938], vec![updated_mean], 1e-4),
        ],
    })
}

/// The worked example with its published fixtures.
pub fn appendix_check() -> Result<AppendixReport> {
    appendix_check_with(&APPENDIX_FORECAST, &APPENDIX_OBSERVATIONS, APPENDIX_R, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_config() -> ExperimentConfig {
        let mut config = ExperimentConfig {
            variety: "HD-2967".into(),
            days: 40,
            runs: 2,
            seed: 11,
            ..ExperimentConfig::default()
        };
        config.optimizer.demmogc.generations = 8;
        config.optimizer.de.generations = 8;
        config.optimizer.ga.generations = 8;
        config.optimizer.pso.iterations = 8;
        config.optimizer.hho.iterations = 8;
        config.enkf.ensemble_size = 10;
        config
    }

    #[test]
    fn appendix_fixtures_pass() {
        let report = appendix_check().unwrap();
        assert!(report.passed(), "{:#?}", report.assertions);
        assert_eq!(report.assertions.len(), 5);
    }

    #[test]
    fn appendix_detects_injected_gain_fault() {
        let report = appendix_check_with(
            &APPENDIX_FORECAST,
            &APPENDIX_OBSERVATIONS,
            APPENDIX_R,
            Some(0.5),
        )
        .unwrap();
        let by_name = |name: &str| {
            report
                .assertions
                .iter()
                .find(|a| a.name == name)
                .unwrap()
                .passed
        };
        assert!(by_name("forecast mean"));
        assert!(by_name("covariance"));
        assert!(!by_name("kalman gain"));
        assert!(!by_name("updated ensemble"));
    }

    #[test]
    fn appendix_full_precision_differs_from_rounded_values() {
        // the published numbers are rounded: at 1e-9 the gain check fails
        let diag =
            single_step_update(&APPENDIX_FORECAST, &APPENDIX_OBSERVATIONS, 1.0, APPENDIX_R)
                .unwrap();
        assert!((diag.gain - 0.3846).abs() > 1e-9);
        assert!((diag.gain - 0.00625 / 0.01625).abs() < 1e-15);
    }

    #[test]
    fn calibrate_reports_both_modes_and_is_deterministic() {
        let config = fast_config();
        let a = calibrate(&config).unwrap();
        let b = calibrate(&config).unwrap();
        assert_eq!(a.best_genome, b.best_genome);
        assert_eq!(a.history, b.history);
        assert_eq!(a.assimilation_metrics, b.assimilation_metrics);
        assert_eq!(a.history.len(), 8);
        assert!(a.assimilation_metrics.mse >= 0.0);
        assert!(a.wofost_metrics.mse >= 0.0);
        assert_eq!(a.trajectories.target.len(), 40);
        // best-so-far history is non-increasing
        for w in a.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn collapsed_search_space_recovers_the_point() {
        let mut config = fast_config();
        let mut custom = config.resolve_variety("HD-2967").unwrap();
        custom.name = "point".into();
        custom.weather.tavg = (22.0, 22.0 + 1e-9);
        custom.weather.rain = (500.0, 500.0 + 1e-9);
        config.custom_varieties.push(custom);
        config.variety = "point".into();
        let outcome = calibrate(&config).unwrap();
        assert!((outcome.best_genome[0] - 22.0).abs() < 1e-6);
        assert!((outcome.best_genome[1] - 500.0).abs() < 1e-6);
    }

    #[test]
    fn compare_runs_all_cells_deterministically() {
        let config = fast_config();
        let algorithms = [Algorithm::Demmogc, Algorithm::De];
        let varieties = ["HD-2967".to_string()];
        let a = compare(&config, &algorithms, &varieties).unwrap();
        let b = compare(&config, &algorithms, &varieties).unwrap();
        assert_eq!(a.cells.len(), 4); // 2 algorithms x 1 variety x 2 runs
        assert_eq!(a, b);
        assert_eq!(a.summaries.len(), 2);
        assert_eq!(a.wilcoxon.len(), 1);
        assert_eq!(a.wilcoxon[0].baseline, Algorithm::De);
        // distinct cells received distinct optimizer streams
        let genomes: Vec<&Vec<f64>> =
            a.cells.iter().map(|c| &c.outcome.best_genome).collect();
        assert!(genomes.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn compare_rejects_empty_matrix() {
        let config = fast_config();
        assert!(compare(&config, &[], &["HD-2967".to_string()]).is_err());
        assert!(compare(&config, &[Algorithm::De], &[]).is_err());
    }

    #[test]
    fn known_genome_target_with_zero_jitter_is_recoverable_exactly() {
        let mut config = fast_config();
        config.target_jitter = 0.0;
        config.target_genome = Some([22.0, 500.0]);
        config.mode = Mode::WofostOnly;
        let variety = config.resolve_variety("HD-2967").unwrap();
        let target = build_target(&config, &variety, 0).unwrap();
        let weather = constant_weather(&variety, 22.0, 500.0, config.days);
        assert_eq!(target, simulate_season(&variety, &weather, INITIAL_LAI).unwrap());
    }
}
