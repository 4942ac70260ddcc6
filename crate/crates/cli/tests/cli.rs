use std::process::{Command, Output};

fn nuar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nuar")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_row_count() {
    let out = nuar(&["simulate", "--p", "1", "--alpha", "0.5", "--c", "1", "--n", "100", "--seed", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,x"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn simulate_is_byte_identical() {
    let args = ["simulate", "--p", "3", "--lambda1", "-1", "--n", "500", "--seed", "11", "--init", "stationary"];
    assert_eq!(nuar(&args).stdout, nuar(&args).stdout);
    let other = ["simulate", "--p", "3", "--lambda1", "-1", "--n", "500", "--seed", "12", "--init", "stationary"];
    assert_ne!(nuar(&args).stdout, nuar(&other).stdout);
}

#[test]
fn theory_reports_h0() {
    let out = nuar(&["theory", "--p", "2", "--lambda1", "+1", "--bulk", "0.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let h0 = &v["H0"];
    let at = |i: usize, j: usize| h0[i][j].as_f64().unwrap();
    assert!((at(0, 0) - 2.0).abs() < 1e-12);
    assert!((at(1, 1) - 4.0 / 3.0).abs() < 1e-12);
    assert_eq!(at(0, 1), 0.0);
    assert_eq!(at(1, 0), 0.0);
}

#[test]
fn theory_reads_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("spec.json");
    std::fs::write(&file, r#"{"p":2,"unit_root_mode":"-1","c":1,"alpha":0.5,"bulk":[{"re":0.5}]}"#).unwrap();
    let out = nuar(&["theory", "--spec", file.to_str().unwrap(), "--n", "10000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["B_inv"].is_array());
    assert_eq!(v["n"], 10000);
}

#[test]
fn estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("path.csv");
    let sim = nuar(&[
        "simulate", "--p", "2", "--bulk", "0.4", "--n", "2000", "--seed", "3", "--out", csv.to_str().unwrap(),
    ]);
    assert!(sim.status.success());
    let out = nuar(&["estimate", "--in", csv.to_str().unwrap(), "--p", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let theta: Vec<f64> = v["theta_hat"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    // theta_n = (rho_n + 0.4, -0.4 rho_n) with rho_n close to 0.978
    assert!((theta[0] - 1.378).abs() < 0.1, "{theta:?}");
    assert!((theta[1] + 0.391).abs() < 0.1, "{theta:?}");
    assert_eq!(v["n"], 2000);
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let args = [
        "experiment", "--p", "2", "--n", "500", "--reps", "30", "--lambda1", "-1", "--seed", "42", "--workers", "2",
        "--out", csv.to_str().unwrap(),
    ];
    let out = nuar(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let tail = v["tail_freq_6p5"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&tail));
    assert_eq!(v["reps"], 30);
    let first = std::fs::read(&csv).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("rep,p,alpha,c,n,lambda1_mode,statistic,value\n"));
    assert_eq!(text.lines().count(), 31);

    // same seed, different worker count: identical CSV
    let csv2 = dir.path().join("run2.csv");
    let mut args2 = args.to_vec();
    args2[12] = "1";
    let last = args2.len() - 1;
    args2[last] = csv2.to_str().unwrap();
    assert!(nuar(&args2).status.success());
    assert_eq!(std::fs::read(&csv2).unwrap(), first);
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"[{"p":2,"alpha":0.5,"n":400,"reps":5,"unit_root_mode":"+1","seed":1},
            {"p":2,"alpha":0.5,"n":400,"reps":5,"unit_root_mode":"+1","seed":1}]"#,
    )
    .unwrap();
    let out = nuar(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["quantiles"], v[1]["quantiles"]);
}

#[test]
fn exit_codes() {
    assert_eq!(nuar(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(nuar(&["theory", "--bulk", "1.5x"]).status.code(), Some(2));
    assert_eq!(nuar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(nuar(&["sweep"]).status.code(), Some(2));
    // valid syntax, invalid model
    assert_eq!(nuar(&["theory", "--p", "2", "--bulk", "1.5"]).status.code(), Some(1));
    assert_eq!(nuar(&["estimate", "--in", "/nonexistent/file.csv", "--p", "1"]).status.code(), Some(1));
    for sub in ["simulate", "estimate", "theory", "experiment", "sweep"] {
        assert_eq!(nuar(&[sub, "--help"]).status.code(), Some(0), "{sub}");
    }
}

#[test]
fn version_is_machine_readable() {
    let out = nuar(&["--version"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), format!("nuar {}", env!("CARGO_PKG_VERSION")));
}
