use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use cropcal::core::{Error, Result};
use cropcal::harness::{
    appendix_check, assimilation_preview, calibrate, compare, export_compare_csv,
    export_convergence_csv, export_metrics_csv, export_metrics_json, export_summary_csv,
    export_trajectory_csv, reproducibility_header, Algorithm, CompareReport, ExperimentConfig,
    Mode, OutputFormat,
};
use cropcal::metrics::{summarize_runs, wilcoxon_rank_sum};
use cropcal::wofost::{constant_weather, simulate_season, variety_presets, INITIAL_LAI};

/// Crop-model calibration experiments: daily LAI simulation, ensemble
/// Kalman filter assimilation, and evolutionary parameter search.
#[derive(Parser)]
#[command(name = "cropcal", version)]
struct Cli {
    /// JSON experiment configuration; CLI flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Optimizer: demmogc, de, ga, pso, or hho.
    #[arg(long, global = true)]
    algorithm: Option<String>,
    /// Crop variety preset or custom variety name.
    #[arg(long, global = true)]
    variety: Option<String>,
    /// Number of runs per comparison cell.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Root seed; every stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Objective mode: assimilation or wofost-only.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Output directory for result files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Run comparison cells sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-running model trajectory at the reference weather.
    Simulate,
    /// Filter-corrected trajectory at the reference weather.
    Assimilate,
    /// Optimize the weather genome with one algorithm.
    Calibrate,
    /// Full matrix of algorithms and varieties with summaries and
    /// rank-sum tests.
    Compare {
        /// Comma-separated algorithms (default: all five).
        #[arg(long)]
        algorithms: Option<String>,
        /// Comma-separated varieties (default: the --variety value).
        #[arg(long)]
        varieties: Option<String>,
        /// Statistical mode: 30 runs per cell unless --runs overrides.
        #[arg(long)]
        stats: bool,
    },
    /// Summaries and rank-sum tests recomputed from a stored comparison.
    Stats {
        /// compare.json produced by the compare subcommand.
        #[arg(long)]
        input: PathBuf,
    },
    /// Verify the built-in five-member filter example.
    AppendixCheck,
    /// List the embedded crop variety presets.
    Presets,
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(a) = &cli.algorithm {
        config.algorithm = Algorithm::from_str(a)?;
    }
    if let Some(v) = &cli.variety {
        config.variety = v.clone();
    }
    if let Some(r) = cli.runs {
        config.runs = r;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(m) = &cli.mode {
        config.mode = Mode::from_str(m)?;
    }
    if let Some(o) = &cli.out {
        config.out_dir = Some(o.clone());
    }
    if let Some(f) = &cli.format {
        config.format = OutputFormat::from_str(f)?;
    }
    if cli.sequential {
        config.parallel = false;
    }
    config.validate()?;
    Ok(config)
}

fn ensure_out_dir(config: &ExperimentConfig) -> Result<Option<PathBuf>> {
    match &config.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Ok(Some(dir.clone()))
        }
        None => Ok(None),
    }
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run_simulate(config: &ExperimentConfig) -> Result<()> {
    let variety = config.resolve_variety(&config.variety)?;
    let [tavg, rain] = config.target_genome.unwrap_or([
        variety.tavg_midpoint(),
        variety.rain_midpoint(),
    ]);
    let weather = constant_weather(&variety, tavg, rain, config.days);
    let lai = simulate_season(&variety, &weather, INITIAL_LAI)?;
    let mut out = reproducibility_header(config)?;
    out.push_str("day,lai\n");
    for (day, value) in lai.iter().enumerate() {
        out.push_str(&format!("{day},{value}\n"));
    }
    let dir = ensure_out_dir(config)?;
    write_or_print(dir.map(|d| d.join("simulate.csv")).as_deref(), &out)
}

fn run_assimilate(config: &ExperimentConfig) -> Result<()> {
    let bundle = assimilation_preview(config)?;
    let dir = ensure_out_dir(config)?;
    match dir {
        Some(d) => {
            let path = d.join("trajectory.csv");
            export_trajectory_csv(&path, config, &bundle)?;
            println!("wrote {}", path.display());
        }
        None => {
            let tmp = tempfile_path()?;
            export_trajectory_csv(&tmp, config, &bundle)?;
            print!("{}", std::fs::read_to_string(&tmp)?);
            let _ = std::fs::remove_file(&tmp);
        }
    }
    Ok(())
}

fn tempfile_path() -> Result<PathBuf> {
    let mut path = std::env::temp_dir();
    path.push(format!("cropcal-{}.csv", std::process::id()));
    Ok(path)
}

fn run_calibrate(config: &ExperimentConfig) -> Result<()> {
    let outcome = calibrate(config)?;
    println!(
        "{} on {} ({}): genome = [{:.4}, {:.2}], objective = {:.6}",
        outcome.algorithm,
        outcome.variety,
        outcome.mode,
        outcome.best_genome[0],
        outcome.best_genome[1],
        outcome.best_fitness
    );
    println!(
        "assimilation: mse {:.6} rmse {:.6} | free run: mse {:.6} rmse {:.6}",
        outcome.assimilation_metrics.mse,
        outcome.assimilation_metrics.rmse,
        outcome.wofost_metrics.mse,
        outcome.wofost_metrics.rmse
    );
    if let Some(dir) = ensure_out_dir(config)? {
        match config.format {
            OutputFormat::Csv => {
                export_metrics_csv(&dir.join("metrics.csv"), config, std::slice::from_ref(&outcome))?
            }
            OutputFormat::Json => {
                export_metrics_json(&dir.join("result.json"), config, &outcome)?
            }
        }
        export_convergence_csv(&dir.join("convergence.csv"), config, &outcome.history)?;
        export_trajectory_csv(&dir.join("trajectory.csv"), config, &outcome.trajectories)?;
        println!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn parse_list<T: FromStr<Err = Error>>(input: &str) -> Result<Vec<T>> {
    input.split(',').map(|s| T::from_str(s.trim())).collect()
}

fn print_report(report: &CompareReport) {
    for s in &report.summaries {
        println!(
            "{}: rmse mean {:.6} median {:.6} std {:.6} over {} runs",
            s.algorithm,
            s.rmse.mean,
            s.rmse.median,
            s.rmse.std,
            s.rmse.samples.len()
        );
    }
    for w in &report.wilcoxon {
        println!(
            "demmogc vs {}: statistic {:.1}, p = {:.3e}",
            w.baseline, w.result.statistic, w.result.p_value
        );
    }
}

fn run_compare(
    config: &ExperimentConfig,
    algorithms: Option<&str>,
    varieties: Option<&str>,
) -> Result<()> {
    let algorithms = match algorithms {
        Some(list) => parse_list::<Algorithm>(list)?,
        None => Algorithm::ALL.to_vec(),
    };
    let varieties: Vec<String> = match varieties {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => vec![config.variety.clone()],
    };
    let report = compare(config, &algorithms, &varieties)?;
    print_report(&report);
    if let Some(dir) = ensure_out_dir(config)? {
        export_compare_csv(&dir.join("compare.csv"), config, &report)?;
        export_summary_csv(&dir.join("summary.csv"), config, &report)?;
        let json = serde_json::json!({
            "seed": config.seed,
            "config": config,
            "report": report,
        });
        std::fs::write(dir.join("compare.json"), serde_json::to_string_pretty(&json)?)?;
        println!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn run_stats(config: &ExperimentConfig, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let mut report: CompareReport = serde_json::from_value(doc["report"].clone())?;

    // recompute summaries and rank-sum tests from the stored cells
    let algorithms: Vec<Algorithm> = {
        let mut seen = Vec::new();
        for cell in &report.cells {
            if !seen.contains(&cell.algorithm) {
                seen.push(cell.algorithm);
            }
        }
        seen
    };
    let samples = |a: Algorithm| -> Vec<f64> {
        report
            .cells
            .iter()
            .filter(|c| c.algorithm == a)
            .map(|c| c.outcome.assimilation_metrics.rmse)
            .collect()
    };
    report.summaries = algorithms
        .iter()
        .map(|&a| {
            Ok(cropcal::harness::AlgorithmSummary {
                algorithm: a,
                rmse: summarize_runs(&samples(a))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.wilcoxon = if algorithms.contains(&Algorithm::Demmogc) {
        let ours = samples(Algorithm::Demmogc);
        algorithms
            .iter()
            .filter(|&&a| a != Algorithm::Demmogc)
            .map(|&a| {
                Ok(cropcal::harness::WilcoxonComparison {
                    baseline: a,
                    result: wilcoxon_rank_sum(&ours, &samples(a))?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    print_report(&report);
    if let Some(dir) = ensure_out_dir(config)? {
        export_summary_csv(&dir.join("summary.csv"), config, &report)?;
        println!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn run_appendix_check() -> Result<bool> {
    let report = appendix_check()?;
    for a in &report.assertions {
        println!(
            "{}: {} (expected {:?}, got {:?}, tolerance {:e})",
            a.name,
            if a.passed { "pass" } else { "FAIL" },
            a.expected,
            a.actual,
            a.tolerance
        );
    }
    Ok(report.passed())
}

fn run_presets(config: &ExperimentConfig) -> Result<()> {
    match config.format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&variety_presets())?)
        }
        OutputFormat::Csv => {
            println!("name,lai_max,rgrlai,tbase,fc,wp,bd,tavg_low,tavg_high,rain_low,rain_high");
            for v in variety_presets() {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    v.name,
                    v.crop.lai_max,
                    v.crop.rgrlai,
                    v.crop.tbase,
                    v.soil.fc,
                    v.soil.wp,
                    v.soil.bd,
                    v.weather.tavg.0,
                    v.weather.tavg.1,
                    v.weather.rain.0,
                    v.weather.rain.1
                );
            }
        }
    }
    Ok(())
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let result = match &cli.command {
        Command::Simulate => run_simulate(&config),
        Command::Assimilate => run_assimilate(&config),
        Command::Calibrate => run_calibrate(&config),
        Command::Compare {
            algorithms,
            varieties,
            stats,
        } => {
            let mut config = config.clone();
            if *stats && cli.runs.is_none() {
                config.runs = 30;
            }
            run_compare(&config, algorithms.as_deref(), varieties.as_deref())
        }
        Command::Stats { input } => run_stats(&config, input),
        Command::AppendixCheck => match run_appendix_check() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Command::Presets => run_presets(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
