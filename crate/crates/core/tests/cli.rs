use std::process::Command;

fn qreset(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qreset"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn reference_spec_file(dir: &tempfile::TempDir) -> String {
    let p = dir.path().join("reference.json");
    let spec = qreset::model::SystemSpec::two_level(1.0, 3.0, 0.1, 1.0);
    std::fs::write(&p, spec.to_json_string()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn classify_writes_27_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let (code, _, _) = qreset(&["classify", "--all", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "o_s,o_b,o_c,dim_l,dim_k,dim_p,dim_a,purifiable");
    assert_eq!(lines.len(), 28);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 16);
}

#[test]
fn tmin_prints_the_reset_time() {
    let dir = tempfile::tempdir().unwrap();
    let spec = reference_spec_file(&dir);
    let (code, out, _) = qreset(&["tmin", "--spec", &spec, "--case", "s1s1:s3"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "15.708");
    let (_, out, _) = qreset(&[
        "tmin",
        "--spec",
        &spec,
        "--case",
        "s1s1:s1",
        "--approx",
        "--precision",
        "1",
    ]);
    assert_eq!(out.trim(), "47.1");
}

#[test]
fn max_purity_prints_the_bound() {
    let (code, out, _) = qreset(&[
        "max-purity",
        "--d-b",
        "4",
        "--beta",
        "1",
        "--gap",
        "3",
        "--omega-s",
        "1",
    ]);
    assert_eq!(code, 0);
    let v: f64 = out.trim().parse().unwrap();
    assert!((v - 0.995).abs() <= 1e-3);
    let (code, out, _) = qreset(&["max-purity", "--sweep", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"omega_s\": 1,\n  \"j\": oops\n}").unwrap();
    let (code, _, err) = qreset(&["tmin", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("3:"), "{err}");
    let unknown = dir.path().join("unknown.json");
    let mut v: serde_json::Value = serde_json::from_str(
        &qreset::model::SystemSpec::two_level(1.0, 3.0, 0.1, 1.0).to_json_string(),
    )
    .unwrap();
    v["colour"] = serde_json::json!(1);
    std::fs::write(&unknown, v.to_string()).unwrap();
    assert_eq!(qreset(&["tmin", "--spec", unknown.to_str().unwrap()]).0, 2);
    assert_eq!(qreset(&["tmin", "--case", "s1s3:s1"]).0, 1);
    assert_eq!(qreset(&["tmin", "--case", "x1s3:s1"]).0, 2);
    assert_eq!(
        qreset(&["epsilon-check", "--eigenvalues", "0.5,0.5", "--eps", "0"]).0,
        2
    );
    assert_eq!(qreset(&["tmin", "--spec", "/nonexistent/spec.json"]).0, 1);
    assert_eq!(qreset(&["frobnicate"]).0, 2);
}

#[test]
fn help_documents_each_subcommand() {
    for sub in [
        "classify",
        "tmin",
        "table1",
        "simulate",
        "weyl",
        "qsl-verify",
        "max-purity",
        "epsilon-check",
        "angle-scan",
        "optimize",
    ] {
        let (code, out, _) = qreset(&[sub, "--help"]);
        assert_eq!(code, 0, "{sub}");
        assert!(out.contains("Usage"), "{sub}");
    }
}

#[test]
fn table1_matches_library() {
    let (code, out, _) = qreset(&["table1"]);
    assert_eq!(code, 0);
    let rows = qreset::dynamics::table_i(
        &qreset::dynamics::TABLE_I_SETS,
        qreset::dynamics::UnitConvention::TableI,
    )
    .unwrap();
    assert_eq!(out, qreset::dynamics::table_i_csv(&rows));
}

#[test]
fn simulate_is_deterministic_and_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let (code, _, err) = qreset(&[
            "simulate",
            "--case",
            "s1s1:s3",
            "--n-times",
            "50",
            "--format",
            "json",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let curve: qreset::dynamics::PurityCurve = serde_json::from_slice(&ta).unwrap();
    assert_eq!(curve.times.len(), 50);
    let (code, csv, _) = qreset(&["simulate", "--case", "s1s1:s3", "--n-times", "5"]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("t,purity\n0,"));
}

#[test]
fn optimize_emits_result_and_pulse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let pulse = dir.path().join("p.csv");
    let (code, _, err) = qreset(&[
        "optimize",
        "--case",
        "s1s1:s3",
        "--segments",
        "10",
        "--max-iter",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--pulse-csv",
        pulse.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let r: qreset::control::OptimizationResult =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r.pulse.amplitudes.len(), 10);
    assert_eq!(std::fs::read_to_string(pulse).unwrap().lines().count(), 11);
}

#[test]
fn weyl_qsl_epsilon_and_scans() {
    let (code, out, _) = qreset(&["weyl", "--case", "s1s1:s3", "--time", "0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["total_angle"].as_f64().unwrap().abs() < 1e-7);
    let (code, out, _) = qreset(&["qsl-verify", "--grid-n", "64"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["min_total_angle"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-3);
    let (code, out, _) = qreset(&[
        "epsilon-check",
        "--eigenvalues",
        "0.9,0.09,0.005,0.005",
        "--eps",
        "0.1",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eligible"], serde_json::json!(true));
    let (code, out, _) = qreset(&[
        "angle-scan",
        "--grid-n",
        "16",
        "--loci",
        "1.5707963267948966",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["coincide"], serde_json::json!(true));
    let (code, _, _) = qreset(&["angle-scan", "--axis", "bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn thread_cap_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_qreset"))
        .args(["max-purity"])
        .env("QRESET_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_qreset"))
        .args(["max-purity"])
        .env("QRESET_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
