use std::fs;
use std::path::{Path, PathBuf};

use bishap_cli::record::{read_records, ExplanationRecord};
use bishap_cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY};
use tempfile::TempDir;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn bishap(args: &[&str]) -> i32 {
    run(std::iter::once("bishap").chain(args.iter().copied()))
}

fn saved_dictator() -> String {
    format!("saved:{}", fixture("dictator_model.json"))
}

fn explain_dictator(out: &Path, extra: &[&str]) -> i32 {
    let data = fixture("dictator.csv");
    let model = saved_dictator();
    let out = out.display().to_string();
    let mut args = vec!["explain", "--data", &data, "--model", &model, "--out", &out];
    args.extend_from_slice(extra);
    bishap(&args)
}

fn dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == column).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

/// Random `d`-feature CSV with a label column.
fn random_csv(path: &Path, d: usize, rows: usize) {
    let mut w = csv::Writer::from_path(path).unwrap();
    let mut header: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    w.write_record(&header).unwrap();
    for r in 0..rows {
        let mut row: Vec<String> =
            (0..d).map(|i| (((r * 7 + i * 13) % 17) as f64 / 17.0 - 0.5 + 0.01 * i as f64).to_string()).collect();
        row.push((r % 2).to_string());
        w.write_record(&row).unwrap();
    }
    w.flush().unwrap();
}

#[test]
fn exact_dictator_record() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(explain_dictator(tmp.path(), &["--method", "exact"]), EXIT_OK);
    let records = read_records(tmp.path()).unwrap();
    assert_eq!(records.len(), 4);
    for r in &records {
        assert_eq!(r.sources, vec![0]);
        assert_eq!(r.sinks, vec![1, 2]);
        assert_eq!(r.h_edges.len(), 4);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { r.interaction[j][i] };
                assert_eq!(r.adjacency[i][j], want);
            }
        }
    }
}

#[test]
fn sampling_is_deterministic_and_independent_of_jobs() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let flags = ["--method", "sampling", "--samples", "300", "--seed", "11"];
    assert_eq!(explain_dictator(a.path(), &flags), EXIT_OK);
    assert_eq!(explain_dictator(b.path(), &flags), EXIT_OK);
    let mut parallel = flags.to_vec();
    parallel.extend(["--jobs", "3"]);
    assert_eq!(explain_dictator(c.path(), &parallel), EXIT_OK);
    assert_eq!(dir_bytes(a.path()), dir_bytes(b.path()));
    assert_eq!(dir_bytes(a.path()), dir_bytes(c.path()));
}

#[test]
fn records_round_trip_byte_for_byte() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(explain_dictator(tmp.path(), &["--method", "kernel", "--samples", "64"]), EXIT_OK);
    for (name, bytes) in dir_bytes(tmp.path()) {
        let text = String::from_utf8(bytes).unwrap();
        let r = ExplanationRecord::from_json(&text).unwrap();
        assert_eq!(r.to_json().unwrap(), text, "{}", name.display());
    }
}

#[test]
fn resume_keeps_existing_records() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(explain_dictator(tmp.path(), &["--method", "exact", "--limit", "2"]), EXIT_OK);
    let first = fs::read(tmp.path().join("0.json")).unwrap();
    fs::write(tmp.path().join("0.json"), b"{}").unwrap();
    assert_eq!(explain_dictator(tmp.path(), &["--method", "exact", "--resume"]), EXIT_OK);
    assert_eq!(fs::read(tmp.path().join("0.json")).unwrap(), b"{}");
    assert_eq!(dir_bytes(tmp.path()).len(), 4);
    assert_eq!(explain_dictator(tmp.path(), &["--method", "exact"]), EXIT_OK);
    assert_eq!(fs::read(tmp.path().join("0.json")).unwrap(), first);
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let wide = tmp.path().join("wide.csv");
    random_csv(&wide, 20, 6);
    let out = tmp.path().join("out").display().to_string();
    let wide = wide.display().to_string();
    let code = bishap(&["explain", "--data", &wide, "--method", "exact", "--epochs", "2", "--out", &out]);
    assert_eq!(code, EXIT_CONFIG);
    assert_eq!(explain_dictator(tmp.path(), &["--gamma=-1"]), EXIT_CONFIG);
    assert_eq!(explain_dictator(tmp.path(), &["--damping", "1"]), EXIT_CONFIG);
    assert_eq!(explain_dictator(tmp.path(), &["--samples", "0"]), EXIT_CONFIG);
    assert_eq!(explain_dictator(tmp.path(), &["--method", "magic"]), EXIT_CONFIG);
    assert_eq!(explain_dictator(tmp.path(), &["--baseline", "fixed:1,2"]), EXIT_CONFIG);
    assert_eq!(bishap(&["explain", "--data", "/nonexistent.csv", "--out", &out]), EXIT_CONFIG);
    assert_eq!(bishap(&["frobnicate"]), EXIT_CONFIG);
}

#[test]
fn adapter_failures_exit_3() {
    let tmp = TempDir::new().unwrap();
    let data = fixture("pair.csv");
    let out = tmp.path().display().to_string();
    for mode in ["error", "garbage", "short", "unnormalized", "exit"] {
        let model = format!("adapter:python3 {} {mode}", fixture("faulty_adapter.py"));
        let code = bishap(&["explain", "--data", &data, "--model", &model, "--method", "exact", "--out", &out]);
        assert_eq!(code, EXIT_RUNTIME, "{mode}");
    }
}

#[test]
fn train_then_explain_with_saved_model() {
    let tmp = TempDir::new().unwrap();
    let data = fixture("dictator.csv");
    let dir = tmp.path().display().to_string();
    assert_eq!(bishap(&["train", "--data", &data, "--epochs", "20", "--out", &dir]), EXIT_OK);
    let model = format!("saved:{}", tmp.path().join("model.json").display());
    let out = tmp.path().join("records").display().to_string();
    assert_eq!(bishap(&["explain", "--data", &data, "--model", &model, "--method", "exact", "--out", &out]), EXIT_OK);
    assert_eq!(read_records(Path::new(&out)).unwrap().len(), 4);
}

#[test]
fn analyze_rewrites_records_and_groups_by_label() {
    let tmp = TempDir::new().unwrap();
    let records = tmp.path().join("records");
    assert_eq!(explain_dictator(&records, &["--method", "exact"]), EXIT_OK);
    let out = tmp.path().join("analyzed");
    let (r, o, data) = (records.display().to_string(), out.display().to_string(), fixture("dictator.csv"));
    assert_eq!(bishap(&["analyze", "--records", &r, "--data", &data, "--gamma", "1", "--out", &o]), EXIT_OK);
    let global: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("global.json")).unwrap()).unwrap();
    let labels: Vec<&str> = global.as_array().unwrap().iter().map(|g| g["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["label=0", "label=1"]);
    let analyzed = read_records(&out).unwrap();
    assert!(analyzed.iter().all(|r| r.gamma == 1.0 && r.h_edges.len() == 6));
}

#[test]
fn gamma_sweep_rows() {
    let tmp = TempDir::new().unwrap();
    let records = tmp.path().join("records");
    assert_eq!(explain_dictator(&records, &["--method", "exact"]), EXIT_OK);
    let (r, data, model) = (records.display().to_string(), fixture("dictator.csv"), saved_dictator());
    let out = tmp.path().join("sweep");
    let o = out.display().to_string();
    let sweep = |gammas: &str| {
        bishap(&["sweep-gamma", "--data", &data, "--model", &model, "--records", &r, "--gammas", gammas, "--out", &o])
    };
    assert_eq!(sweep("1e-5"), EXIT_OK);
    let density = csv_column(&out.join("gamma_sweep.csv"), "mean_density");
    assert!((density[0] - 4.0 / 6.0).abs() < 1e-12);
    assert_eq!(sweep("0,1e-3,1e-3"), EXIT_CONFIG);
    assert_eq!(sweep("1,0"), EXIT_CONFIG);
}

#[test]
fn gamma_sweep_extremes_on_dense_graphs() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data.csv");
    random_csv(&data, 4, 10);
    let data = data.display().to_string();
    let records = tmp.path().join("records").display().to_string();
    let model_flags = ["--data", &data, "--epochs", "50", "--seed", "3"];
    let mut explain = vec!["explain", "--method", "exact", "--out", &records];
    explain.extend(model_flags);
    assert_eq!(bishap(&explain), EXIT_OK);
    let out = tmp.path().join("sweep");
    let o = out.display().to_string();
    let mut sweep = vec!["sweep-gamma", "--records", &records, "--gammas", "0,2", "--out", &o];
    sweep.extend(model_flags);
    assert_eq!(bishap(&sweep), EXIT_OK);
    assert_eq!(csv_column(&out.join("gamma_sweep.csv"), "mean_density"), vec![0.0, 1.0]);
}

#[test]
fn evaluate_outputs() {
    let tmp = TempDir::new().unwrap();
    let records = tmp.path().join("records");
    assert_eq!(explain_dictator(&records, &["--method", "exact"]), EXIT_OK);
    let (r, data, model) = (records.display().to_string(), fixture("dictator.csv"), saved_dictator());
    let out = tmp.path().join("eval");
    let o = out.display().to_string();
    let code = bishap(&["evaluate", "--data", &data, "--model", &model, "--records", &r, "--out", &o]);
    assert_eq!(code, EXIT_OK);
    let fractions = csv_column(&out.join("mr_curve.csv"), "fraction");
    let accuracy = csv_column(&out.join("mr_curve.csv"), "posthoc_accuracy");
    assert_eq!(fractions[0], 0.0);
    assert_eq!(accuracy[0], 1.0);
    assert_eq!(csv_column(&out.join("directional.csv"), "posthoc_accuracy_pct")[0], 100.0);
    assert_eq!(csv_column(&out.join("auc.csv"), "insertion_auc").len(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["instances"], 4);

    let again = tmp.path().join("eval2");
    let a = again.display().to_string();
    assert_eq!(bishap(&["evaluate", "--data", &data, "--model", &model, "--records", &r, "--out", &a]), EXIT_OK);
    assert_eq!(dir_bytes(&out), dir_bytes(&again));

    let wide = tmp.path().join("wide.csv");
    random_csv(&wide, 5, 4);
    let w = wide.display().to_string();
    assert_eq!(bishap(&["evaluate", "--data", &w, "--records", &r, "--epochs", "2", "--out", &o]), EXIT_CONFIG);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(bishap(&["verify", "--seed-range", "0..10"]), EXIT_OK);
    assert_eq!(bishap(&["verify", "--seed-range", "0..10", "--inject-fault", "oracle"]), EXIT_VERIFY);
    assert_eq!(bishap(&["verify", "--seed-range", "0..10", "--inject-fault", "bound"]), EXIT_VERIFY);
    assert_eq!(bishap(&["verify", "--seed-range", "0..10", "--inject-fault", "speed"]), EXIT_CONFIG);
    assert_eq!(bishap(&["verify", "--seed-range", "10..0"]), EXIT_CONFIG);
}
