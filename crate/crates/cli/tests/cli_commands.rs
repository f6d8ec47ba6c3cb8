use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::Command as Process;

use nek_cli::{config_hash, run, CliError, Command, ExperimentConfig, RunOptions};

fn rows(bytes: &[u8]) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {}", row[key]))
}

fn table(command: Command, toml: &str, opts: RunOptions) -> Vec<HashMap<String, String>> {
    let cfg = ExperimentConfig::from_toml(toml, None).unwrap();
    let out = run(command, &cfg, &opts).unwrap();
    rows(&out.files[0].1)
}

#[test]
fn constants_rows_and_leading_term() {
    let t = table(Command::Constants, "[window]\neps = [0.2, 0.1, 0.05]\na = [1.0]", RunOptions::default());
    assert_eq!(t.len(), 3);
    for (row, eps) in t.iter().zip([0.2, 0.1, 0.05]) {
        // |M| / (4 ε) for the unit ball.
        let hand = 4.0 * PI / 3.0 / (4.0 * eps);
        assert!((num(row, "leading") - hand).abs() < 1e-9 * hand);
        assert_eq!(row["status"], "ok");
        let sum = num(row, "leading") + num(row, "log_term") + num(row, "constant_term");
        assert!((sum - num(row, "total")).abs() < 1e-12 * sum.abs());
    }
    let t = table(Command::Constants, "[window]\neps = [0.2, 0.1, 0.05]\na = [1.0, 0.5]", RunOptions::default());
    assert_eq!(t.len(), 6);
}

#[test]
fn empty_eps_list_is_rejected() {
    let e = ExperimentConfig::from_toml("[window]\neps = []", None).unwrap_err();
    assert!(matches!(e, CliError::Config(m) if m.contains("window.eps")));
}

#[test]
fn provider_gap_gives_na_row_with_reason() {
    let t = table(
        Command::Constants,
        "[potential]\nkind = \"linear_axis\"\nbeta = 1.0\n[window]\neps = [0.1]",
        RunOptions::default(),
    );
    assert_eq!(t[0]["constant_term"], "NA");
    assert_eq!(t[0]["total"], "NA");
    assert!(t[0]["status"].contains("not configured"));
    assert!(num(&t[0], "leading") > 0.0);
}

#[test]
fn drift_toward_window_lowers_the_leading_term() {
    let base = "[window]\neps = [0.1]\n";
    let free = table(Command::Constants, base, RunOptions::default());
    let pushed = table(
        Command::Constants,
        &format!("{base}[potential]\nkind = \"linear_axis\"\nbeta = 1.0\naxis = [0, 0, 1]"),
        RunOptions::default(),
    );
    assert!(num(&pushed[0], "leading") < num(&free[0], "leading"));
}

#[test]
fn operator_rows() {
    let t = table(Command::Operators, "[operators]\na = [1.0, 0.5]", RunOptions::default());
    let one = &t[0];
    assert!((num(one, "K_a") - PI * PI).abs() < 1e-12);
    assert!(num(one, "I_aniso").abs() < 1e-6);
    let exact = 4.0 * PI * PI * (2.0 * 2f64.ln() - 1.5);
    assert!((num(one, "I_log") - exact).abs() < 1e-3 * exact.abs());
    assert!(num(&t[1], "I_log").is_finite());
    assert_eq!(t[1]["doubling_difference"], "NA");

    let doubled = table(
        Command::Operators,
        "[operators]\na = [0.5]",
        RunOptions {
            order_doubled: true,
            ..Default::default()
        },
    );
    assert!(num(&doubled[0], "doubling_difference") < 1e-4);
    assert!((num(&doubled[0], "I_log") - num(&t[1], "I_log")).abs() < 1e-4);
    assert!(ExperimentConfig::from_toml("[operators]\na = [1.5]", None).is_err());
}

#[test]
fn kernel_columns_on_the_sphere() {
    let t = table(Command::Kernel, "[kernel]\ndistances = [0.05, 0.02, 0.01]", RunOptions::default());
    for row in &t {
        assert_eq!(num(row, "ii_difference"), 0.0);
        let d = num(row, "distance");
        assert!((num(row, "coulomb") * d * 2.0 * PI - 1.0).abs() < 1e-2);
    }
}

#[test]
fn tangential_drift_column_is_odd() {
    let cfg = "[potential]\nkind = \"linear_axis\"\nbeta = 0.7\naxis = [1, 0.3, 0]\n[kernel]\ndistances = [0.05, 0.1]\n";
    let plus = table(Command::Kernel, &format!("{cfg}direction_angle = 0.4"), RunOptions::default());
    let minus = table(Command::Kernel, &format!("{cfg}direction_angle = {}", 0.4 + PI), RunOptions::default());
    for (p, m) in plus.iter().zip(&minus) {
        let (a, b) = (num(p, "drift_directional"), num(m, "drift_directional"));
        assert!(a.abs() > 1e-3);
        assert!((a + b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn calibration_table() {
    let t = table(
        Command::McCalibrate,
        "[mc]\ndt = 5e-4\nn_paths = 20000\nseed = 5",
        RunOptions::default(),
    );
    assert_eq!(t.len(), 2);
    for (row, expected) in t.iter().zip([1.0 / 6.0, 1.0 / 15.0]) {
        assert!((num(row, "mc_mean") - expected).abs() < 3.0 * num(row, "mc_stderr"));
        assert_eq!(row["n_censored"], "0");
    }
}

#[test]
fn compare_rows_carry_both_sides() {
    let t = table(
        Command::Compare,
        "[window]\neps = [0.3]\n[mc]\ndt = 4e-3\nn_paths = 2000\nrefinement_levels = 1",
        RunOptions::default(),
    );
    let row = &t[0];
    assert!(num(row, "asymptotic_avg") > 0.0 && num(row, "mc_mean") > 0.0);
    let rel = (num(row, "mc_mean") - num(row, "asymptotic_avg")) / num(row, "asymptotic_avg");
    assert!((rel - num(row, "rel_diff")).abs() < 1e-12);
}

#[test]
fn hash_ignores_nothing_that_matters() {
    let a = ExperimentConfig::default();
    let mut b = a.clone();
    let opts = RunOptions::default();
    assert_eq!(config_hash(Command::Compare, &a, &opts), config_hash(Command::Compare, &b, &opts));
    b.mc.seed += 1;
    assert_ne!(config_hash(Command::Compare, &a, &opts), config_hash(Command::Compare, &b, &opts));
    assert_ne!(config_hash(Command::Compare, &a, &opts), config_hash(Command::Constants, &a, &opts));
}

#[test]
fn binary_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "[window]\neps = [0.2]\n").unwrap();
    let out = dir.path().join("out");
    let status = Process::new(env!("CARGO_BIN_EXE_nek"))
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "constants"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read(out.join("constants.csv")).unwrap();
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][0]["file"], "constants.csv");
    assert_eq!(manifest["outputs"][0]["sha256"], nek_cli::output::sha256_hex(&csv));

    let bad = Process::new(env!("CARGO_BIN_EXE_nek")).args(["operators", "--a", "1.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--a[0]"));
}
