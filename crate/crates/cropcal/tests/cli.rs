//! End-to-end checks of the command-line binary: subcommands, exit
//! codes, and output file shapes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cropcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cropcal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let json = serde_json::json!({
        "variety": "HD-2967",
        "days": 30,
        "seed": 7,
        "optimizer": {
            "demmogc": { "generations": 3 },
            "de": { "generations": 3 },
        },
        "enkf": { "ensemble_size": 8 },
    });
    fs::write(&path, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    path
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn presets_lists_all_varieties() {
    let out = cropcal(&["presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("name,lai_max,rgrlai"));
    for name in ["HD-2967", "Lok-1", "IR64", "Sahbhagi Dhan", "BT Cotton"] {
        assert!(lines.iter().any(|l| l.starts_with(name)), "{name} missing");
    }

    let out = cropcal(&["presets", "--format", "json"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 5);
}

#[test]
fn simulate_prints_daily_lai() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out = cropcal(&["simulate", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# seed: 7\n# config: "));
    let lines = data_lines(&text);
    assert_eq!(lines[0], "day,lai");
    assert_eq!(lines.len(), 31); // header + 30 days
    let values: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn assimilate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("results");
    let out = cropcal(&[
        "assimilate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines[0], "day,simulated,assimilated,observed,target");
    assert_eq!(lines.len(), 31);
    // observation column populated only on observation days
    let observed: Vec<bool> = lines[1..]
        .iter()
        .map(|l| !l.split(',').nth(3).unwrap().is_empty())
        .collect();
    assert!(observed.iter().any(|&b| b));
    assert!(observed.iter().any(|&b| !b));
}

#[test]
fn calibrate_writes_csv_and_json_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("results");
    let out = cropcal(&[
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines = data_lines(&metrics);
    assert!(lines[0].starts_with("algorithm,variety,mode,run,tavg,rain,assim_mse"));
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), 14);
    assert!(out_dir.join("convergence.csv").exists());
    assert!(out_dir.join("trajectory.csv").exists());

    let out = cropcal(&[
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json",
        "--algorithm",
        "de",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["result"]["algorithm"], "de");
    assert!(doc["result"]["best_fitness"].as_f64().unwrap().is_finite());
}

#[test]
fn compare_then_stats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("results");
    let out = cropcal(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--algorithms",
        "demmogc,de",
        "--runs",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let compare_csv = fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    assert_eq!(data_lines(&compare_csv).len(), 7); // header + 2 algorithms x 3 runs
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines = data_lines(&summary);
    assert_eq!(lines[0], "kind,algorithm,mean,median,std,statistic,p_value");
    assert!(lines.iter().any(|l| l.starts_with("summary,demmogc")));
    assert!(lines.iter().any(|l| l.starts_with("wilcoxon,de")));

    let stats_out = cropcal(&[
        "stats",
        "--input",
        out_dir.join("compare.json").to_str().unwrap(),
    ]);
    assert!(stats_out.status.success());
    let text = stdout(&stats_out);
    assert!(text.contains("demmogc: rmse mean"));
    assert!(text.contains("demmogc vs de: statistic"));
}

#[test]
fn sequential_flag_matches_parallel_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let run = |extra: &[&str], out_name: &str| -> String {
        let out_dir = dir.path().join(out_name);
        let mut args = vec![
            "compare",
            "--config",
            config.to_str().unwrap(),
            "--algorithms",
            "demmogc,pso",
            "--runs",
            "2",
            "--out",
        ];
        let out_str = out_dir.to_str().unwrap().to_string();
        args.push(Box::leak(out_str.into_boxed_str()));
        args.extend_from_slice(extra);
        let out = cropcal(&args);
        assert!(out.status.success());
        data_lines(&fs::read_to_string(out_dir.join("compare.csv")).unwrap()).join("\n")
    };
    let parallel = run(&[], "par");
    let sequential = run(&["--sequential"], "seq");
    assert_eq!(parallel, sequential);
}

#[test]
fn appendix_check_passes() {
    let out = cropcal(&["appendix-check"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.contains(": pass")).count(), 5);
}

#[test]
fn exit_codes() {
    // 1: configuration errors
    let out = cropcal(&["calibrate", "--algorithm", "simulated-annealing"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cropcal(&["calibrate", "--variety", "no-such-crop"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = cropcal(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // 2: runtime and io errors
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "file, not a directory").unwrap();
    let config = write_small_config(dir.path());
    let out = cropcal(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = cropcal(&["stats", "--input", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
