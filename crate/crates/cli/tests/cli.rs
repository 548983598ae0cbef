//! End-to-end tests of the `spikesim` binary: subcommand behavior, JSON
//! outputs and exit codes (0 ok, 2 usage, 3 file/format, 4 verification).

mod common;

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn spikesim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikesim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn partition_balances_the_published_example() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("trace.csv"),
        "layer_index,kind,F,C_out_or_N,spike_sum\n0,conv,1,1,100\n1,conv,1,1,300\n",
    )
    .unwrap();
    let out = spikesim(
        &["partition", "--trace", "trace.csv", "--budget", "4"],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["nc_per_layer"], serde_json::json!([1, 3]));
    assert_eq!(json["label"], "lw");
    assert_eq!(json["dense_rows"], serde_json::Value::Null);
}

#[test]
fn partition_scales_to_perf_variants() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("trace.csv"),
        "layer_index,kind,F,C_out_or_N,spike_sum\n0,dense,9,4,0\n1,conv,9,4,50\n2,fc,0,6,20\n",
    )
    .unwrap();
    let out = spikesim(
        &[
            "partition",
            "--trace",
            "trace.csv",
            "--budget",
            "5",
            "--scale",
            "2",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["dense_rows"], serde_json::json!(2));
    assert_eq!(json["label"], "perf2");
    let ncs: Vec<u64> = json["nc_per_layer"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(ncs.iter().sum::<u64>(), 10);
}

#[test]
fn simulate_with_verify_matches_oracle() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 42);
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"allocation": [1, 2, 2]}"#,
    )
    .unwrap();
    let out = spikesim(
        &[
            "simulate",
            "--model",
            "model.json",
            "--input",
            "input.snnt",
            "--config",
            "config.json",
            "--verify",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["verified"], serde_json::json!(true));
    assert_eq!(json["layers"].as_array().unwrap().len(), 3);
    assert_eq!(json["layers"][0]["kind"], "input-conv");

    // The spike totals equal an independent oracle recomputation.
    let loaded = spikesim::formats::model::load_model(&files.model).unwrap();
    let image = spikesim::formats::snnt::load_tensor(&files.input).unwrap();
    let oracle = spikesim::runner::run_oracle(&loaded.net, &image, &loaded.lif).unwrap();
    let oracle_total: u64 = oracle.layers.iter().map(|l| l.output_spikes).sum();
    assert_eq!(json["total_spikes"].as_u64().unwrap(), oracle_total);
    assert_eq!(
        json["prediction"].as_u64().unwrap() as usize,
        oracle.prediction
    );

    // The file copy matches stdout.
    let file_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(file_json, json);
}

#[test]
fn simulate_rate_coding_needs_seed() {
    let dir = tempdir().unwrap();
    common::write_toy_model(dir.path(), 43);
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"allocation": [1, 1, 1], "coding": "rate"}"#,
    )
    .unwrap();
    let out = spikesim(
        &[
            "simulate",
            "--model",
            "model.json",
            "--input",
            "input.snnt",
            "--config",
            "config.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn trace_then_partition_pipeline() {
    let dir = tempdir().unwrap();
    common::write_toy_model(dir.path(), 44);
    let out = spikesim(
        &[
            "trace",
            "--model",
            "model.json",
            "--input",
            "input.snnt",
            "--out",
            "trace.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("layer_index,kind,F,C_out_or_N,spike_sum"));
    assert!(csv.contains("0,dense,9,4,0"), "{csv}");

    let out = spikesim(
        &["partition", "--trace", "trace.csv", "--budget", "6"],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["dense_rows"], serde_json::json!(1));
    let ncs = json["nc_per_layer"].as_array().unwrap();
    assert_eq!(ncs.len(), 2); // conv + fc; the dense layer draws no cores
    let total: u64 = ncs.iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 6);
}

#[test]
fn report_echoes_table_power() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("cycles.json"),
        serde_json::json!({
            "clock_hz": 1e8,
            "layers": (0..8).map(|i| serde_json::json!({"cycles": 1000 * (i + 1), "spikes": 10})).collect::<Vec<_>>(),
        })
        .to_string(),
    )
    .unwrap();
    let out = spikesim(
        &["report", "--cycles", "cycles.json", "--power", "int4"],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["table_total_power_w"], serde_json::json!(1.231));
    assert_eq!(json["table_label"], "int4");
    assert_eq!(json["layers"].as_array().unwrap().len(), 8);
    assert!(json["dynamic_energy_j"].as_f64().unwrap() > 0.0);
}

#[test]
fn report_rejects_layer_count_mismatch() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("cycles.json"),
        r#"{"layers": [{"cycles": 10}, {"cycles": 20}]}"#,
    )
    .unwrap();
    let out = spikesim(
        &["report", "--cycles", "cycles.json", "--power", "int4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_coding_emits_ratio_summary() {
    let dir = tempdir().unwrap();
    common::write_toy_model(dir.path(), 45);
    let out = spikesim(
        &[
            "compare-coding",
            "--model",
            "model.json",
            "--input",
            "input.snnt",
            "--timesteps-rate",
            "6",
            "--timesteps-direct",
            "2",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["rate"]["timesteps"], 6);
    assert_eq!(json["direct"]["timesteps"], 2);
    assert_eq!(json["power_table"], "uniform");
    let spike_ratio = json["spike_ratio"].as_f64().unwrap();
    let direct = json["direct"]["total_spikes"].as_u64().unwrap() as f64;
    let rate = json["rate"]["total_spikes"].as_u64().unwrap() as f64;
    assert!((spike_ratio - rate / direct).abs() < 1e-9);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let out = spikesim(&["simulate", "--nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempdir().unwrap();
    let out = spikesim(
        &[
            "simulate",
            "--model",
            "missing.json",
            "--input",
            "missing.snnt",
            "--config",
            "missing.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn corrupt_tensor_is_a_format_error() {
    let dir = tempdir().unwrap();
    common::write_toy_model(dir.path(), 46);
    std::fs::write(dir.path().join("input.snnt"), b"GARBAGE!").unwrap();
    std::fs::write(dir.path().join("config.json"), r#"{"allocation": [1,1,1]}"#).unwrap();
    let out = spikesim(
        &[
            "simulate",
            "--model",
            "model.json",
            "--input",
            "input.snnt",
            "--config",
            "config.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn verification_mismatch_maps_to_exit_code_4() {
    // The honest pipeline cannot produce a mismatch, so check the
    // classification of a doctored run at the library level.
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 47);
    let loaded = spikesim::formats::model::load_model(&files.model).unwrap();
    let image = spikesim::formats::snnt::load_tensor(&files.input).unwrap();
    let opts = spikesim_core::engine::RunOptions::direct(vec![1, 1, 1]);
    let mut run =
        spikesim_core::engine::simulate_network(&loaded.net, &image, &opts, &loaded.lif).unwrap();
    let oracle = spikesim::runner::run_oracle(&loaded.net, &image, &loaded.lif).unwrap();
    spikesim::runner::verify_against_oracle(&run, &oracle).unwrap();

    // Flip one spike bit and the comparison must fail with code 4.
    let mut plane = run.layers[0].train.plane(0, 0).unwrap().clone();
    plane.set(0, 0, !plane.get(0, 0));
    run.layers[0].train.set_plane(0, 0, plane).unwrap();
    let err = spikesim::runner::verify_against_oracle(&run, &oracle).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(err.to_string().contains("layer 0"));
}

#[test]
fn outputs_are_deterministic_across_runs() {
    let dir = tempdir().unwrap();
    common::write_toy_model(dir.path(), 48);
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"allocation": [2, 1, 3], "coding": "rate", "seed": 123}"#,
    )
    .unwrap();
    let args = [
        "simulate",
        "--model",
        "model.json",
        "--input",
        "input.snnt",
        "--config",
        "config.json",
        "--verify",
    ];
    let a = spikesim(&args, dir.path());
    let b = spikesim(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
