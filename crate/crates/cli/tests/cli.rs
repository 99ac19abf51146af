use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_meanfield"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn converge_writes_exact_csv_schema() {
    let o = run(&["converge", "--config", config("theta.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,m,t,trace_dist,hs_dist,op_dist,cross_term,bound_envelope,runtime_s");
    assert_eq!(lines.count(), 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("slope"));
}

#[test]
fn converge_is_byte_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&[
            "converge",
            "--config",
            config("product.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let fa = fs::read(a.join("product.csv")).unwrap();
    let fb = fs::read(b.join("product.csv")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn json_output_carries_hash_and_fits() {
    let o = run(&["converge", "--config", config("coherent.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let hash = v["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["config_hash"] == hash));
    assert_eq!(v["fits"][0]["outcome"], "fitted");
    assert!(v["fits"][0]["fit"]["slope"].as_f64().unwrap() < -0.4);
}

#[test]
fn seed_override_changes_hash() {
    let path = config("random_theta_log.json");
    let a = run(&["converge", "--config", path.to_str().unwrap(), "--format", "json"]);
    let b = run(&["converge", "--config", path.to_str().unwrap(), "--format", "json", "--seed", "7"]);
    let ha: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let hb: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_ne!(ha["config_hash"], hb["config_hash"]);
}

#[test]
fn superpose_reports_cross_terms_and_weights() {
    let o = run(&["superpose", "--config", config("superpose_psi.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["rows"].as_array().unwrap() {
        let n = row["n"].as_f64().unwrap();
        assert!((row["cross_term"].as_f64().unwrap() - (-n / 2.0).exp()).abs() < 1e-8);
    }
    assert_eq!(v["weights"].as_array().unwrap().len(), 8);
}

#[test]
fn fit_reads_back_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["converge", "--config", config("theta.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("theta.csv");
    let o = run(&["fit", csv.to_str().unwrap(), "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().nth(1).unwrap();
    assert!(line.starts_with("0.5,fitted,-"), "{line}");
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn fit_signals_exact_regime() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "converge",
        "--config",
        config("free_product.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["fit", dir.path().join("product.csv").to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.as_array().unwrap().iter().all(|f| f["outcome"] == "exact_regime"));
}

#[test]
fn hartree_export() {
    let o = run(&["hartree", "--config", config("product.json").to_str().unwrap(), "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,re_0,im_0,re_1,im_1,norm,energy");
    assert_eq!(text.lines().count(), 1 + 11);
}

#[test]
fn check_quick_passes_with_json_verdict() {
    let o = run(&["check", "--level", "quick", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(config("theta.json")).unwrap().replace("\"seed\"", "\"sede\"");
    fs::write(&bad, text).unwrap();
    assert_eq!(run(&["converge", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["converge", "--config", "/nonexistent.json"]).status.code(), Some(2));
    // superposition config through the wrong subcommand
    assert_eq!(run(&["converge", "--config", config("superpose_phi.json").to_str().unwrap()]).status.code(), Some(2));
    // m = 3 is not admissible at n = 4
    let text = fs::read_to_string(config("theta.json")).unwrap().replace("\"m\": 1", "\"m\": 3");
    fs::write(&bad, text).unwrap();
    assert_eq!(run(&["converge", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.json");
    fs::write(
        &big,
        r#"{
        "system": {"geometry": "random", "d": 40, "h_scale": 1.0, "v_scale": 1.0},
        "state": {"family": "product"},
        "n_list": [30],
        "t_list": [0.1]
    }"#,
    )
    .unwrap();
    let o = run(&["converge", "--config", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
