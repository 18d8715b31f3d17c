use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpcdf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpcdf"))
        .args(args)
        .env_remove("DPCDF_OUT_DIR")
        .output()
        .expect("spawn dpcdf")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn mechanize_releases_pinned_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "value\n0.5\n1.2\n2.7\n3.3\n3.9\n");
    for mech in ["ind", "hist", "tree"] {
        let v = json(&dpcdf(&[
            "mechanize", "--input", &input, "--lo", "0", "--hi", "4", "--bins", "4", "--epsilon", "1",
            "--mechanism", mech,
        ]));
        let values = v["values"].as_array().unwrap();
        assert_eq!(values.len(), 4);
        assert_eq!(values[3].as_f64(), Some(1.0));
        assert_eq!(v["total"].as_u64(), Some(5));
    }
    let v = json(&dpcdf(&[
        "mechanize", "--input", &input, "--lo", "0", "--hi", "4", "--branching", "2,2", "--epsilon", "1", "--refine",
        "--consist", "l1",
    ]));
    let values: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(values[3], 1.0);
}

#[test]
fn mechanize_boundary_policy() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.txt", "0.5\n1.2\n9.0\n");
    let out = dpcdf(&["mechanize", "--input", &input, "--lo", "0", "--hi", "4", "--bins", "4", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "out_of_domain");
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    let v = json(&dpcdf(&[
        "mechanize", "--input", &input, "--lo", "0", "--hi", "4", "--bins", "4", "--epsilon", "1", "--clamp",
    ]));
    assert_eq!(v["total"].as_u64(), Some(3));

    let bad = write(dir.path(), "bad.txt", "0.5\nabc\n");
    let out = dpcdf(&["mechanize", "--input", &bad, "--lo", "0", "--hi", "4", "--bins", "4", "--epsilon", "1"]);
    assert_eq!(error_kind(&out), "parse");
    let out = dpcdf(&["mechanize", "--input", "/nonexistent/x", "--lo", "0", "--hi", "4", "--bins", "4", "--epsilon", "1"]);
    assert_eq!(error_kind(&out), "io");
}

#[test]
fn optimize_strategies() {
    let v = json(&dpcdf(&["--format", "json", "optimize", "--bins", "997", "--epsilon", "1", "--samples", "900"]));
    assert_eq!(v["branching"].as_array().unwrap().len(), 1);
    assert_eq!(v["rounded"].as_bool(), Some(false));

    let v = json(&dpcdf(&["--format", "json", "optimize", "--bins", "1000", "--epsilon", "1"]));
    assert_eq!(v["bins"].as_u64(), Some(1009));
    assert_eq!(v["rounded"].as_bool(), Some(true));

    let v = json(&dpcdf(&["--format", "json", "optimize", "--bins", "1048576", "--epsilon", "1"]));
    let h = v["height"].as_u64().unwrap();
    assert!(h == 4 || h == 5);
    let prod: f64 = v["branching"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).product();
    assert_eq!(prod, 1048576.0);
    let eps: f64 = v["budgets"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((eps - 1.0).abs() < 1e-12);

    let v = json(&dpcdf(&[
        "--format", "json", "optimize", "--bins", "96", "--epsilon", "1", "--strategy", "exhaustive",
    ]));
    assert_eq!(v["candidates"].as_u64(), Some(19));
    assert_eq!(v["bins"].as_u64(), Some(96));

    let out = dpcdf(&["optimize", "--bins", "0", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn consist_projects_vector() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.txt", "0.1\n0.5\n0.3\n1\n");
    let v = json(&dpcdf(&["consist", "--input", &input, "--total", "10", "--metric", "l1"]));
    let values: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(values[3], 1.0);
    assert_eq!(v["cost"].as_f64(), Some(2.0));
}

#[test]
fn usage_errors_exit_two() {
    let out = dpcdf(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
    let out = dpcdf(&["optimize", "--bins", "ten", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figure1_csv_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dpcdf"))
        .args(["--format", "csv", "figure1", "--epsilon", "0.5,1"])
        .env("DPCDF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("epsilon,mechanism,e2_closed_form,e2_empirical,stderr"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().any(|r| r.starts_with("1.0,ind,33162750")));

    let explicit = dir.path().join("nested/f.json");
    let out = dpcdf(&["--format", "json", "--out", explicit.to_str().unwrap(), "figure1", "--epsilon", "1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(explicit).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
}

#[test]
fn benchmark_from_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mechanism":"tree","branching":[4,4],"epsilons":[0.5,1.0],"samples":50,"trials":200,"seed":9,"refine":true,"consist":["l1"]}"#,
    );
    let a = dpcdf(&["--format", "csv", "benchmark", "--config", &cfg]);
    let b = dpcdf(&["--format", "csv", "benchmark", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = dpcdf(&["--seed", "10", "--format", "csv", "benchmark", "--config", &cfg]);
    assert!(c.status.success());

    let bad = write(dir.path(), "bad.json", r#"{"mechanism":"tree","epsilons":[1.0],"bogus":1}"#);
    let out = dpcdf(&["benchmark", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
}
