use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hankel-sigma"));
    c.env_remove("HANKEL_SIGMA_THREADS");
    c
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn result(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    v["result"].clone()
}

fn single_term(alpha: f64, r: f64, k: f64) -> String {
    format!(r#"{{"kernel": {{"type": "quasi_carleman", "terms": [{{"coeff": 1, "alpha": {alpha}, "r": {r}, "k": {k}}}]}}}}"#)
}

#[test]
fn sigma_of_a_finite_part_kernel_is_one_atom() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sigma"], &write_config(&dir, "c.json", &single_term(1.0, 0.0, 0.5)));
    assert_eq!(out.status.code(), Some(0));
    let atoms = result(&out)["symbolic"]["atoms"].clone();
    assert_eq!(atoms.as_array().unwrap().len(), 1);
    assert_eq!(atoms[0]["kind"], "finite_part");
    assert_eq!(atoms[0]["k"], 0.5);
    // 1 / Gamma(-1/2) = -1 / (2 sqrt(pi))
    let want = -0.5 / std::f64::consts::PI.sqrt();
    assert!((atoms[0]["coeff"].as_f64().unwrap() - want).abs() < 1e-15);
}

#[test]
fn tabulated_carleman_sigma_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"kernel": {"type": "quasi_carleman", "terms": [{"coeff": 1, "alpha": 0, "r": 0, "k": -1}], "tabulated": true}}"#;
    let out = run(&["sigma"], &write_config(&dir, "c.json", cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    assert!(r["symbolic"].is_null());
    assert_eq!(r["comparison"]["against"], "closed_form");
    assert!(r["comparison"]["max_deviation"].as_f64().unwrap() < 1e-4);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let malformed = write_config(&dir, "bad.json", "{not json");
    assert_eq!(run(&["sigma"], &malformed).status.code(), Some(2));
    let unknown = write_config(&dir, "unknown.json", r#"{"kernel": {"type": "carleman"}, "cutof": 3}"#);
    assert_eq!(run(&["sigma"], &unknown).status.code(), Some(2));
    let carleman = write_config(&dir, "ok.json", r#"{"kernel": {"type": "carleman"}}"#);
    assert_eq!(run(&["sigma", "--grid-size", "1000"], &carleman).status.code(), Some(2));
    assert_eq!(run(&["sigma", "--cutoff", "-1"], &carleman).status.code(), Some(2));
    let missing = bin().args(["counts", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let threads = bin().args(["section", "--section-n", "4"]).arg("--config").arg(&carleman).env("HANKEL_SIGMA_THREADS", "x").output().unwrap();
    assert_eq!(threads.status.code(), Some(2));
    let no_kernel = bin().arg("counts").output().unwrap();
    assert_eq!(no_kernel.status.code(), Some(2));
}

#[test]
fn counts_match_predictions() {
    let dir = TempDir::new().unwrap();
    for (k, plus, minus) in [(1.5, "infinite", Value::from(1)), (3.0, "2", Value::from(2)), (-0.5, "infinite", Value::from(0))] {
        let out = run(&["counts"], &write_config(&dir, "c.json", &single_term(1.0, 0.0, k)));
        assert_eq!(out.status.code(), Some(0), "k = {k}");
        let r = result(&out);
        let p = &r["prediction"]["prediction"];
        assert_eq!(p["n_plus"].to_string().trim_matches('"'), plus, "k = {k}");
        assert_eq!(p["n_minus"], minus, "k = {k}");
        assert_eq!(r["verdict"]["overall"], "consistent", "k = {k}: {r}");
    }
}

#[test]
fn verify_failure_exits_with_3_after_writing_the_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let cfg = r#"{"kernel": {"type": "carleman"}, "tolerance": {"identity": 1e-30}}"#;
    let out = bin().arg("verify").arg("--config").arg(write_config(&dir, "c.json", cfg)).arg("--out").arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["result"]["pass"], false);
}

#[test]
fn verify_passes_for_catalog_pairs() {
    let dir = TempDir::new().unwrap();
    for cfg in [r#"{"kernel": {"type": "carleman"}}"#, r#"{"kernel": {"type": "exp_square"}}"#] {
        let out = run(&["verify"], &write_config(&dir, "c.json", cfg));
        assert_eq!(out.status.code(), Some(0), "{cfg}");
        assert!(result(&out)["max_error"].as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn moments_recover_the_hilbert_indicator() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("eta.csv");
    let cfg = format!(r#"{{"moments": {{"generalized_hilbert": 0}}, "csv": {:?}}}"#, csv.display().to_string());
    let out = run(&["moments"], &write_config(&dir, "c.json", &cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    assert_eq!(r["solution"]["converged"], true);
    let table = std::fs::read_to_string(&csv).unwrap();
    for line in table.lines().skip(1) {
        let (mu, eta) = line.split_once(',').unwrap();
        let (mu, eta): (f64, f64) = (mu.parse().unwrap(), eta.parse().unwrap());
        if mu.abs() > 0.05 && mu.abs() < 0.9 {
            assert!((eta - if mu > 0.0 { 1.0 } else { 0.0 }).abs() < 1e-3, "eta({mu}) = {eta}");
        }
    }
}

#[test]
fn unreachable_residual_bound_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"moments": {"values": [1, 0.5, 0.2, 0.1], "solver": {"residual_bound": 1e-300}}}"#;
    let out = run(&["moments"], &write_config(&dir, "c.json", cfg));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(result(&out)["solution"]["converged"], false);
}

#[test]
fn moments_file_input() {
    let dir = TempDir::new().unwrap();
    let q = dir.path().join("q.csv");
    let mut text = String::from("n,q_n\n");
    for n in 0..32 {
        text.push_str(&format!("{n},{}\n", if n % 2 == 0 { 2.0 / (n as f64 + 1.0) } else { 0.0 }));
    }
    std::fs::write(&q, text).unwrap();
    let cfg = format!(r#"{{"moments": {{"file": {:?}}}}}"#, q.display().to_string());
    let out = run(&["moments"], &write_config(&dir, "c.json", &cfg));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(result(&out)["n_moments"], 32);
}

#[test]
fn asymptotics_table_meets_the_rate() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"asymptotics": {"alpha": 1, "r": 0, "k": -0.5}}"#;
    let out = run(&["asymptotics"], &write_config(&dir, "c.json", cfg));
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    assert_eq!(r["regime"], "plus_end");
    assert!(r["max_scaled_deviation"].as_f64().unwrap() <= 10.0);
}

#[test]
fn section_eigenvalues_lie_in_the_hilbert_band() {
    let dir = TempDir::new().unwrap();
    let out = run(&["section", "--section-n", "16", "--tau", "0"], &write_config(&dir, "c.json", r#"{"moments": {"generalized_hilbert": 0.5}}"#));
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    let s = &r["sections"][0];
    assert_eq!(s["n"], 16);
    assert_eq!(s["tau"], 0.0);
    for e in s["eigenvalues"].as_array().unwrap() {
        let e = e.as_f64().unwrap();
        assert!((-1e-10..=std::f64::consts::PI).contains(&e));
    }
}

#[test]
fn reports_are_byte_identical_and_written_atomically() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &single_term(1.0, 0.0, 1.5));
    let report = dir.path().join("report.json");
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let out = bin().arg("counts").arg("--config").arg(&cfg).arg("--out").arg(&report).env("HANKEL_SIGMA_THREADS", threads).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        runs.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    // only the config and the report: no temporary files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}
