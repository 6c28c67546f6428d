use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wavattack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavattack"))
        .args(args)
        .output()
        .expect("run wavattack")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, name: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name} = ")))
        .and_then(|v| v.parse().ok())
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let p = dir.path().join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_default_peak() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = wavattack(&["sweep", "--out", path_str(&out)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t2,first_term,second_term,v_be"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1001);
    let best = rows.iter().max_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert!((best[0] - 0.3).abs() <= 0.001 + 1e-12);
    assert!((best[3] - 1.2432).abs() < 5e-5);
}

#[test]
fn sweep_two_steps_and_rerun() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(wavattack(&["sweep", "--steps", "2", "--out", path_str(&a)])
        .status
        .success());
    assert!(wavattack(&["sweep", "--steps", "2", "--out", path_str(&b)])
        .status
        .success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_unwritable_path() {
    let o = wavattack(&["sweep", "--out", "/nonexistent-dir/x/sweep.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn sweep_json_lines() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[sweep]\nsteps = 5\n[output]\nformat = \"json-lines\"\n",
    );
    let o = wavattack(&["--config", &cfg, "sweep"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2]["t2"].as_f64(), Some(0.5));
    assert_eq!(rows[2]["v_be"].as_f64(), Some(1.0));
}

#[test]
fn solve_same_sign() {
    let o = wavattack(&["solve", "--xe", "3", "--pe", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("T1 = 2.5000000000000000e-1"), "{text}");
    assert_eq!(field(&text, "T2"), Some(0.5));
}

#[test]
fn solve_zero_outcome() {
    let text = stdout(&wavattack(&["solve", "--xe", "0", "--pe", "0"]));
    assert_eq!(field(&text, "signal_intensity"), Some(0.0));
    assert_eq!(field(&text, "T1"), Some(0.5));
}

#[test]
fn solve_mixed_signs() {
    let o = wavattack(&["solve", "--xe", "2", "--pe", "-1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(field(&text, "relative_residual_x").unwrap().abs() < 1e-9);
    assert!(field(&text, "relative_residual_p").unwrap().abs() < 1e-9);
    assert!(field(&text, "signal_intensity").unwrap() >= 0.0);
}

#[test]
fn solve_infeasible_fixed_t2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[attack]\npolicy = { kind = \"fixed\", t2 = 0.5 }\n");
    let o = wavattack(&["--config", &cfg, "solve", "--xe", "2", "--pe", "-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn coupler_forward_and_inverse() {
    let text = stdout(&wavattack(&["coupler", "--lambda", "1.55"]));
    assert!((field(&text, "transmittance").unwrap() - 0.5).abs() < 1e-12);
    let text = stdout(&wavattack(&["coupler", "--transmittance", "0.5"]));
    assert!(text
        .lines()
        .filter_map(|l| l.strip_prefix("lambda_um = "))
        .any(|v| (v.parse::<f64>().unwrap() - 1.55).abs() < 1e-9));
    let o = wavattack(&["coupler", "--transmittance", "1.1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn coupler_needs_one_direction() {
    assert_eq!(wavattack(&["coupler"]).status.code(), Some(2));
    assert_eq!(
        wavattack(&["coupler", "--lambda", "1.5", "--transmittance", "0.4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_hiding_is_silent() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let o = wavattack(&[
        "simulate",
        "--rounds",
        "100000",
        "--seed",
        "9",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let excess = field(&text, "excess_hat").unwrap();
    let se = field(&text, "excess_se").unwrap();
    assert!(excess.abs() <= 3.0 * se, "{text}");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 100_001);
}

#[test]
fn simulate_fixed_peak_excess() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[attack]\npolicy = { kind = \"fixed\", t2 = 0.3 }\n");
    let out = dir.path().join("s.csv");
    let o = wavattack(&[
        "--config",
        &cfg,
        "simulate",
        "--rounds",
        "100000",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let excess = field(&text, "excess_hat").unwrap();
    let se = field(&text, "excess_se").unwrap();
    let expected = 0.6 + 1.2432074 - 1.0;
    assert!((excess - expected).abs() <= 3.0 * se, "{text}");
    assert!(text.contains("attack_detected = true"));
}

#[test]
fn simulate_single_round() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("one.csv");
    let o = wavattack(&["simulate", "--rounds", "1", "--out", path_str(&out)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 2);
    assert!(stdout(&o).contains("insufficient data"));
}

#[test]
fn simulate_infeasible_names_round() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[attack]\npolicy = { kind = \"fixed\", t2 = 0.5 }\n");
    let out = dir.path().join("s.csv");
    let o = wavattack(&[
        "--config",
        &cfg,
        "simulate",
        "--rounds",
        "1000",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("round "), "{err}");
}

#[test]
fn simulate_json_lines() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.jsonl");
    let cfg = write_config(&dir, "[output]\nformat = \"json-lines\"\n");
    let o = wavattack(&[
        "--config",
        &cfg,
        "simulate",
        "--rounds",
        "200",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 200);
    assert_eq!(rows[7]["round"].as_u64(), Some(7));
    assert!(rows[7]["T2"].as_f64().is_some());
}

#[test]
fn config_rejects_unknown_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[protocol]\netaa = 0.5\n");
    let o = wavattack(&["--config", &cfg, "config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("etaa"));
}

#[test]
fn config_missing_file() {
    assert_eq!(
        wavattack(&["--config", "/nonexistent.toml", "config"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_echo_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[protocol]\neta = 0.3\n[attack]\npolicy = { kind = \"same-sign-only\" }\nforged_lo_intensity = 5e7\n",
    );
    let first = stdout(&wavattack(&["--config", &cfg, "--seed", "42", "config"]));
    let echoed = dir.path().join("echo.toml");
    fs::write(&echoed, &first).unwrap();
    let second = stdout(&wavattack(&["--config", path_str(&echoed), "config"]));
    assert_eq!(first, second);
    assert!(first.contains("seed = 42"));
}

#[test]
fn example_config_parses() {
    let example = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.toml");
    let o = wavattack(&["--config", example, "config"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let default = stdout(&wavattack(&["config"]));
    assert_eq!(stdout(&o), default);
}
