use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use experiments::{ResultRow, TrialRecord};

fn aodprec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aodprec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<ResultRow> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn decomp_sweep_writes_schema_and_archive() {
    let dir = tempfile::tempdir().unwrap();
    let out = aodprec(
        &["decomp-sweep", "--sweep", "n_rf", "--values", "4,16", "--bits", "1", "--trials", "3", "--seed", "8"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("decomp.csv")).unwrap();
    assert!(text.starts_with("sweep_name,sweep_value,method,metric,mean,std,trials,seed\n"));
    let timing = fs::read_to_string(dir.path().join("decomp_timing.csv")).unwrap();
    assert!(timing.starts_with("sweep_name,sweep_value,wall_time_ms\n"));
    assert_eq!(timing.lines().count(), 3);

    let rows = rows(&dir.path().join("decomp.csv"));
    let archive: Vec<TrialRecord> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("decomp_trials.json")).unwrap()).unwrap();
    for row in &rows {
        assert_eq!((row.trials, row.seed), (3, 8));
        let values: Vec<f64> = archive
            .iter()
            .filter(|t| t.sweep_value == row.sweep_value)
            .map(|t| t.values[&row.method][&row.metric])
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!((mean - row.mean).abs() <= 1e-15 * mean.abs().max(1.0));
    }
    let square = rows.iter().find(|r| r.sweep_value == "16" && r.metric == "decp_err").unwrap();
    assert!(square.mean <= 1e-9, "{}", square.mean);
}

#[test]
fn square_rf_is_exact_for_every_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let out = aodprec(
        &["decomp-sweep", "--sweep", "bits", "--values", "1,2,3,inf", "--n-rf", "16", "--trials", "5"],
        dir.path(),
    );
    assert!(out.status.success());
    for row in rows(&dir.path().join("decomp.csv")).iter().filter(|r| r.metric == "decp_err") {
        assert!(row.mean <= 1e-9, "B = {}: {}", row.sweep_value, row.mean);
    }
}

#[test]
fn hybrid_bound_not_below_best_digital() {
    let dir = tempfile::tempdir().unwrap();
    let out = aodprec(
        &[
            "aeb-sweep", "--sweep", "aod", "--values", "-40,-20,0,20,40", "--n-tx", "20", "--n-rf", "4", "--bits", "inf",
            "--trials", "5",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = rows(&dir.path().join("aeb.csv"));
    let is_bound = |r: &&ResultRow| r.metric.starts_with("aeb_") && !r.metric.ends_with("_degenerate");
    let best_digital = rows
        .iter()
        .filter(is_bound)
        .filter(|r| r.method == "digital")
        .map(|r| r.mean)
        .fold(f64::INFINITY, f64::min);
    for r in rows.iter().filter(is_bound).filter(|r| r.method == "hybrid") {
        assert!(r.mean >= best_digital - 1e-12, "{} {}", r.sweep_value, r.mean);
    }
}

#[test]
fn quant_bound_and_design_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = aodprec(&["quant-bound", "--trials", "4", "--n-tx", "8", "--n-rf", "4"], dir.path());
    assert!(out.status.success());
    let bounds = fs::read_to_string(dir.path().join("quantbound_bounds.csv")).unwrap();
    let mut lines = bounds.lines();
    assert_eq!(lines.next(), Some("B,factor,C,true_error,decp_ub"));
    assert_eq!(lines.count(), 8);

    let out = aodprec(&["design", "--ue-angles", "-30,30", "--n-tx", "12", "--n-rf", "6"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dump: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("design.json")).unwrap()).unwrap();
    assert_eq!(dump["grid_angles_deg"].as_array().unwrap().len(), 2);
    assert_eq!(dump["aeb"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "sweep = \"n_rf\"\nvalues = [2, 4]\nbits = \"inf\"\ntrials = 2\nseed = 5\n").unwrap();
    let out = aodprec(&["decomp-sweep", "--config", cfg.to_str().unwrap(), "--trials", "3"], dir.path());
    assert!(out.status.success());
    assert!(rows(&dir.path().join("decomp.csv")).iter().all(|r| r.trials == 3 && r.seed == 5));

    fs::write(&cfg, "n_tx = 4\nn_rf = 8\n").unwrap();
    let out = aodprec(&["decomp-sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_rf"));

    fs::write(&cfg, "n_antennas = 4\n").unwrap();
    let out = aodprec(&["decomp-sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = aodprec(&["aeb-sweep", "--ue-angles", "0,60", "--m-pilots", "18"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = aodprec(&["decomp-sweep", "--trials", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
