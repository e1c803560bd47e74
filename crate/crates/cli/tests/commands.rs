use std::path::Path;
use std::process::{Command, Output};

use plasmonium_cli::output::{load_sweep_csv, load_sweep_json, read_json, Document};
use plasmonium_cli::records::{MetricsRecord, ValleyRecord};
use serde_json::Value;
use tempfile::TempDir;

fn plasmonium(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plasmonium"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let res = plasmonium(out, args);
    assert!(res.status.success(), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
}

fn data_lines(path: &Path) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn spectrum_row_counts() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["spectrum", "--e-l-step", "0.1"]);
    assert_eq!(data_lines(&dir.path().join("spectrum.csv")), 29);
    ok(dir.path(), &["spectrum", "--e-l-start", "0.7", "--e-l-stop", "0.7"]);
    assert_eq!(data_lines(&dir.path().join("spectrum.csv")), 1);
    ok(dir.path(), &["spectrum"]);
    assert_eq!(data_lines(&dir.path().join("spectrum.csv")), 57);
}

#[test]
fn sweep_outputs_reload_identically() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["spectrum"]);
    let from_csv = load_sweep_csv(&dir.path().join("spectrum.csv")).unwrap();
    let doc = load_sweep_json(&dir.path().join("spectrum.json")).unwrap();
    assert_eq!(from_csv, doc.records);
    assert_eq!(doc.schema, "plasmonium/sweep/v1");
    assert_eq!(doc.config.sweep.e_l_step, Some(0.05));

    ok(dir.path(), &["ssvqe", "--e-l-start", "0.5", "--e-l-stop", "0.7", "--iterations", "30", "--restarts", "1",
        "--noise-1q", "0.001", "--noise-2q", "0.01", "--mitigate"]);
    let from_csv = load_sweep_csv(&dir.path().join("ssvqe.csv")).unwrap();
    let doc = load_sweep_json(&dir.path().join("ssvqe.json")).unwrap();
    assert_eq!(from_csv, doc.records);
    assert_eq!(from_csv.len(), 3);
    assert!(from_csv.iter().all(|r| r.mitigated_energies.is_some() && r.purities.is_some()));
}

#[test]
fn csv_opens_with_schema_and_config() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["--seed", "17", "metrics", "--flux-points", "3"]);
    let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: plasmonium/metrics/v1"));
    let echo: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(echo["seed"], 17);
    assert!(lines.next().unwrap().starts_with("phi_ext,f01,f12"));
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = TempDir::new().unwrap();
    let toml_path = dir.path().join("run.toml");
    std::fs::write(
        &toml_path,
        "seed = 5\n[sweep]\ne_l_start = 1.0\ne_l_stop = 2.0\ne_l_step = 0.5\n[circuit]\ne_j = 4.0\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", toml_path.to_str().unwrap(), "--seed", "9", "spectrum", "--e-l-stop", "1.5"]);
    let doc = load_sweep_json(&dir.path().join("spectrum.json")).unwrap();
    assert_eq!(doc.config.seed, 9);
    assert_eq!(doc.config.circuit.e_j, 4.0);
    assert_eq!(doc.config.circuit.e_c, 0.7);
    assert_eq!(doc.records.iter().map(|r| r.e_l).collect::<Vec<_>>(), vec![1.0, 1.5]);

    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, r#"{"valleys": {"e_l": 2.0}}"#).unwrap();
    ok(dir.path(), &["--config", json_path.to_str().unwrap(), "valleys"]);
    let doc: Document<ValleyRecord> = read_json(&dir.path().join("valleys.json")).unwrap();
    assert_eq!(doc.config.valleys.e_l, 2.0);
}

#[test]
fn invalid_configuration_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"sweep": {"e_l_begin": 0.1}}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--config", bad.to_str().unwrap(), "spectrum"],
        vec!["--config", "/nonexistent/plasmonium.toml", "spectrum"],
        vec!["spectrum", "--e-l-start", "2.0", "--e-l-stop", "1.0"],
        vec!["spectrum", "--e-l-step", "0"],
        vec!["ssvqe", "--mitigate"],
        vec!["ssvqe", "--cutoff", "9"],
        vec!["anticross", "--e-l-start", "1.0", "--e-l-stop", "1.05"],
        vec!["--format", "xml", "spectrum"],
    ];
    for args in cases {
        let res = plasmonium(dir.path(), &args);
        assert_eq!(res.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn failed_points_exit_two_with_log() {
    let dir = TempDir::new().unwrap();
    let res = plasmonium(dir.path(), &["--e-j", "1e308", "ssvqe", "--e-l-start", "1.0", "--e-l-stop", "1.1",
        "--iterations", "5", "--restarts", "1"]);
    assert_eq!(res.status.code(), Some(2));
    let log = std::fs::read_to_string(dir.path().join("errors.log")).unwrap();
    assert_eq!(log.lines().count(), 2);
    let doc = load_sweep_json(&dir.path().join("ssvqe.json")).unwrap();
    assert_eq!(doc.errors.len(), 2);
    assert!(doc.records.is_empty());

    // An output path blocked by a regular file is a runtime failure.
    let blocker = dir.path().join("taken");
    std::fs::write(&blocker, "").unwrap();
    let res = plasmonium(&blocker.join("sub"), &["decompose"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn metrics_sweet_spot_and_parity() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["metrics", "--flux-start", "-0.4", "--flux-stop", "0.4", "--flux-points", "9"]);
    let doc: Document<MetricsRecord> = read_json(&dir.path().join("metrics.json")).unwrap();
    let rows = doc.records;
    assert_eq!(rows[4].phi_ext, 0.0);
    assert!(rows[4].flux_sensitivity <= 1e-6);
    for i in 0..rows.len() {
        assert!((rows[i].f01 - rows[rows.len() - 1 - i].f01).abs() < 1e-9);
    }
    let summary = doc.summary.unwrap();
    assert_eq!(summary["reference_device_anharmonicity"], 0.49);
    println!("anharmonicity at zero flux: {}", summary["closest_to_zero_flux"]["anharmonicity"]);
}

#[test]
fn decompose_contracts() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["decompose"]);
    let doc: Document<Value> = read_json(&dir.path().join("decompose.json")).unwrap();
    let s = doc.summary.unwrap();
    assert!(s["reconstruction_residual"].as_f64().unwrap() <= 1e-10);
    println!("E_L 0.5 term count {} (reference {})", s["term_count"], s["reference_term_count"]);
    assert_eq!(doc.records.len() as u64, s["term_count"].as_u64().unwrap());

    ok(dir.path(), &["--e-j", "0", "decompose"]);
    let doc: Document<Value> = read_json(&dir.path().join("decompose.json")).unwrap();
    assert_eq!(doc.summary.unwrap()["diagonal_only"], true);
    assert!(doc.records.iter().all(|t| t["label"].as_str().unwrap().chars().all(|c| c == 'I' || c == 'Z')));
}

#[test]
fn valley_structure() {
    let dir = TempDir::new().unwrap();
    let count = |args: &[&str]| -> usize {
        ok(dir.path(), args);
        let doc: Document<ValleyRecord> = read_json(&dir.path().join("valleys.json")).unwrap();
        assert_eq!(doc.summary.unwrap()["curve"].as_array().unwrap().len(), 601);
        doc.records.len()
    };
    assert!(count(&["valleys", "--e-l", "0.2"]) >= 2);
    assert_eq!(count(&["--e-j", "0", "valleys"]), 1);
    ok(dir.path(), &["valleys", "--e-l", "2.0"]);
    let doc: Document<ValleyRecord> = read_json(&dir.path().join("valleys.json")).unwrap();
    assert!(doc.records[1..].iter().all(|v| v.depth - doc.records[0].depth >= 4.5 / 2.0));
    assert_eq!(data_lines(&dir.path().join("potential.csv")), 601);
}

#[test]
fn anticross_lands_near_045() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["anticross"]);
    let doc: Document<Value> = read_json(&dir.path().join("anticross.json")).unwrap();
    let s = doc.summary.unwrap();
    let e_l = s["e_l_star"].as_f64().unwrap();
    assert!((0.35..=0.55).contains(&e_l), "{e_l}");
    assert_eq!(s["interior"], true);

    ok(dir.path(), &["anticross", "--e-l-start", "1.0", "--e-l-stop", "2.0", "--e-l-step", "0.25"]);
    let doc: Document<Value> = read_json(&dir.path().join("anticross.json")).unwrap();
    assert_eq!(doc.summary.unwrap()["interior"], false);
}

#[test]
fn history_dump_and_worker_independence() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["ssvqe", "--e-l-start", "0.4", "--e-l-stop", "0.6", "--iterations", "40", "--restarts", "2", "--dump-history"];
    ok(a.path(), &[&["--workers", "1"][..], &args].concat());
    ok(b.path(), &[&["--workers", "3"][..], &args].concat());
    for name in ["ssvqe.csv", "ssvqe.json", "history/point_000.json", "history/point_002.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let hist: Value = serde_json::from_slice(&std::fs::read(a.path().join("history/point_001.json")).unwrap()).unwrap();
    assert_eq!(hist["result"]["cost_history"].as_array().unwrap().len(), 40);
    assert_eq!(hist["result"]["energy_history"].as_array().unwrap().len(), 40);
}

#[test]
fn format_selection() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["--format", "json", "decompose"]);
    assert!(dir.path().join("decompose.json").exists());
    assert!(!dir.path().join("decompose.csv").exists());
    ok(dir.path(), &["--format", "csv", "anticross"]);
    assert!(dir.path().join("anticross.csv").exists());
    assert!(!dir.path().join("anticross.json").exists());
}
