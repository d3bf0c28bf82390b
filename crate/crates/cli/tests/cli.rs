use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hamlearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamlearn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, cfg: Value) -> PathBuf {
    let p = dir.join("config.in.json");
    fs::write(&p, cfg.to_string()).unwrap();
    p
}

fn run_ok(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> String {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = hamlearn(&args);
    assert!(o.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn error_record(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).expect("stderr is a JSON record")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn gen_data_five_qubit_tfim_has_240_records() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        serde_json::json!({
            "system": { "family": "tfim-inhomogeneous", "num_sites": 5 },
            "learn": { "num_observables": 3, "num_states": 8, "num_steps": 5 }
        }),
    );
    let out = tmp.path().join("data");
    run_ok("gen-data", &cfg, &out, &["--seed", "3"]);
    let d: Value = serde_json::from_str(&fs::read_to_string(out.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(d["records"].as_array().unwrap().len(), 240);
    assert_eq!(d["generator_info"]["seed"], 3);
    let csv = read_csv(&out.join("dataset.csv"));
    assert_eq!(csv[0], ["alpha", "i", "k", "value"]);
    assert_eq!(csv.len(), 241);
    let resolved: Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(resolved["seed"], 3);
}

#[test]
fn sweep_writes_27_traces_and_replays_byte_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        serde_json::json!({
            "system": { "family": "zz-xx", "num_sites": 4 },
            "learn": { "optimizer": { "max_epochs": 3 }, "forward_model": { "kind": "trotter", "steps_per_dt": 1 } },
            "heldout": { "observables": ["ZM"], "num_states": 1, "num_steps": 2 }
        }),
    );
    let first = tmp.path().join("a");
    run_ok("sweep", &cfg, &first, &["--parallel", "2"]);
    let traces = fs::read_dir(&first)
        .unwrap()
        .filter(|e| {
            let name = e.as_ref().unwrap().file_name().into_string().unwrap();
            name.starts_with("trace_") && name.ends_with(".csv")
        })
        .count();
    assert_eq!(traces, 27);
    let summary = read_csv(&first.join("summary.csv"));
    assert_eq!(
        summary[0],
        ["num_steps", "num_states", "num_observables", "final_cost", "final_trace_distance", "final_validation_error"]
    );
    assert_eq!(summary.len(), 28);
    let trace = read_csv(&first.join("trace_nt3_ns6_no1.csv"));
    assert_eq!(trace[0], ["epoch", "cost", "trace_distance", "validation_error"]);

    let second = tmp.path().join("b");
    run_ok("sweep", &first.join("config.json"), &second, &[]);
    assert_eq!(
        fs::read(first.join("summary.csv")).unwrap(),
        fs::read(second.join("summary.csv")).unwrap()
    );
}

#[test]
fn validate_model_equal_to_truth_has_negligible_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), serde_json::json!({ "system": { "family": "tfim-homogeneous", "num_sites": 3 } }));
    let out = tmp.path().join("data");
    run_ok("gen-data", &cfg, &out, &[]);
    let truth = out.join("hamiltonian.json");
    let v = tmp.path().join("val");
    run_ok(
        "validate",
        &cfg,
        &v,
        &["--model", truth.to_str().unwrap(), "--truth", truth.to_str().unwrap()],
    );
    let table = read_csv(&v.join("validation.csv"));
    assert_eq!(table[0], ["observable", "error"]);
    assert_eq!(table.len(), 3);
    for row in &table[1..] {
        assert!(row[1].parse::<f64>().unwrap() < 1e-10);
    }
    let series = read_csv(&v.join("timeseries.csv"));
    assert_eq!(series[0], ["alpha", "i", "k", "t", "truth", "model"]);
    assert_eq!(series.len(), 1 + 2 * 2 * 10);
}

#[test]
fn converged_five_qubit_model_extrapolates_three_point_correlators() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        serde_json::json!({
            "system": { "family": "tfim-inhomogeneous", "num_sites": 5 },
            "learn": {
                "num_observables": 3, "num_states": 8, "num_steps": 5,
                "forward_model": { "kind": "exact" }, "gradient_method": "tangent",
                "optimizer": { "max_epochs": 2000, "diagnostics_every": 500, "cost_threshold": 1e-16 }
            },
            "heldout": { "observables": ["XIXIX", "IZZZI"], "num_states": 1, "num_steps": 20 }
        }),
    );
    let run = tmp.path().join("run");
    run_ok("learn-ham", &cfg, &run, &["--seed", "7"]);
    let v = tmp.path().join("val");
    run_ok(
        "validate",
        &cfg,
        &v,
        &[
            "--seed",
            "7",
            "--model",
            run.join("learned.json").to_str().unwrap(),
            "--data",
            run.join("heldout.json").to_str().unwrap(),
        ],
    );
    let series = read_csv(&v.join("timeseries.csv"));
    let max_dev = series[1..]
        .iter()
        .map(|r| (r[4].parse::<f64>().unwrap() - r[5].parse::<f64>().unwrap()).abs())
        .fold(0.0, f64::max);
    assert_eq!(series.len(), 1 + 2 * 20);
    assert!(max_dev < 1e-2, "{max_dev}");
}

#[test]
fn corrupted_model_file_exits_with_schema_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("model.json");
    fs::write(&bad, "{\"family\": \"zz-xx\", \"num_sites\": 3, \"basis\": [\"ZZ\"]").unwrap();
    let o = hamlearn(&[
        "validate",
        "--out",
        tmp.path().join("v").to_str().unwrap(),
        "--model",
        bad.to_str().unwrap(),
        "--truth",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "config");
}

#[test]
fn unknown_config_field_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), serde_json::json!({ "learn": { "num_stepz": 3 } }));
    let o = hamlearn(&["learn-ham", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rec = error_record(&o);
    assert_eq!(rec["exit_code"], 2);
    assert!(rec["message"].as_str().unwrap().contains("num_stepz"));
}

#[test]
fn rising_cost_beyond_divergence_factor_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        serde_json::json!({
            "system": { "family": "tfim-homogeneous", "num_sites": 3 },
            "learn": { "optimizer": { "learning_rate": 1e3, "max_epochs": 50, "divergence_factor": 1.0, "diagnostics_every": 1000 }, "forward_model": { "kind": "trotter", "steps_per_dt": 1 } }
        }),
    );
    let o = hamlearn(&["learn-ham", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(error_record(&o)["error"], "divergence");
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let o = hamlearn(&["gen-data", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_record(&o)["error"], "io");
}

#[test]
fn missing_config_file_exits_4() {
    let tmp = TempDir::new().unwrap();
    let o = hamlearn(&["gen-data", "--config", tmp.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn learn_state_recovers_a_two_qubit_target() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), serde_json::json!({ "state": { "num_qubits": 2 } }));
    let out = tmp.path().join("s");
    run_ok("learn-state", &cfg, &out, &[]);
    let learned: Value = serde_json::from_str(&fs::read_to_string(out.join("learned_state.json")).unwrap()).unwrap();
    assert_eq!(learned["num_qubits"], 2);
    assert_eq!(learned["amplitudes"].as_array().unwrap().len(), 4);
    let trace = read_csv(&out.join("trace.csv"));
    let td: f64 = trace.last().unwrap()[2].parse().unwrap();
    assert!(td < 1e-2, "{td}");
}

#[test]
fn learn_su3_recovers_coefficients_and_reports_ledger() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), serde_json::json!({ "seed": 42 }));
    let out = tmp.path().join("q");
    run_ok("learn-su3", &cfg, &out, &[]);
    let ledger: Value = serde_json::from_str(&fs::read_to_string(out.join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["entries"].as_array().unwrap().len(), 9 * 8 * 3);
    let learned: Value = serde_json::from_str(&fs::read_to_string(out.join("learned.json")).unwrap()).unwrap();
    let err = learned["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .zip(learned["truth"].as_array().unwrap())
        .map(|(a, b)| (a.as_f64().unwrap() - b.as_f64().unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn gen_data_from_stored_dataset_roundtrips_through_learn_ham() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        serde_json::json!({
            "system": { "family": "tfim-homogeneous", "num_sites": 3, "coefficients": [0.8, -0.5] },
            "learn": { "num_states": 3, "num_observables": 2, "num_steps": 4, "optimizer": { "learning_rate": 0.2, "max_epochs": 2000 },
                       "forward_model": { "kind": "exact" }, "gradient_method": "tangent" }
        }),
    );
    let data = tmp.path().join("data");
    run_ok("gen-data", &cfg, &data, &[]);
    let cfg2 = write_config(
        tmp.path(),
        serde_json::json!({
            "dataset": data.join("dataset.json"),
            "learn": { "optimizer": { "learning_rate": 0.2, "max_epochs": 2000 },
                       "forward_model": { "kind": "exact" }, "gradient_method": "tangent" }
        }),
    );
    let out = tmp.path().join("learn");
    run_ok("learn-ham", &cfg2, &out, &[]);
    assert!(!out.join("dataset.json").exists());
    let learned: Value = serde_json::from_str(&fs::read_to_string(out.join("learned.json")).unwrap()).unwrap();
    let c = learned["coeffs"].as_array().unwrap();
    assert!((c[0].as_f64().unwrap() - 0.8).abs() < 1e-4, "{learned}");
}
