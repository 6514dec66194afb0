use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn secf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secf")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("g.csv");
    let out = secf(&["sample", "--target", "gaussian", "--dim", "3", "--n", "120", "--step", "1.0", "--seed", "3", "--out", s(&samples)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header = std::fs::read_to_string(&samples).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(header, "x1,x2,x3,g1,g2,g3,f_x1,f_x2,f_x3");

    let result = dir.path().join("r.json");
    let out = secf(&[
        "estimate", "--samples", s(&samples), "--integrand", "x2", "--method", "secf", "--order", "1",
        "--lambda", "auto-median", "--emit-weights", "--out", s(&result),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&result);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["method", "estimate", "n", "d", "kernel", "basis_order", "weights", "diagnostics", "wall_time_s", "seed"]);
    // x₂ is in the exactly integrated family
    assert!(v["estimate"].as_f64().unwrap().abs() < 1e-8);
    assert!(std::fs::read_to_string(&result).unwrap().contains("e"));

    let mc = secf(&["estimate", "--samples", s(&samples), "--integrand", "x1", "--method", "mc"]);
    let v: Value = serde_json::from_slice(&mc.stdout).unwrap();
    assert!(v.get("diagnostics").is_none() && v.get("weights").is_none() && v.get("kernel").is_none());

    let asecf = secf(&["estimate", "--samples", s(&samples), "--integrand", "x1", "--method", "asecf", "--lambda", "1"]);
    let v: Value = serde_json::from_slice(&asecf.stdout).unwrap();
    // rejected proposals are deduplicated before the subset is drawn
    let n = v["n"].as_u64().unwrap() as f64;
    assert_eq!(v["nystrom"]["n0"].as_u64().unwrap(), n.sqrt().ceil() as u64);

    let diag = secf(&["diagnose", "--samples", s(&samples), "--integrand", "x1", "--lambda", "1.0"]);
    let v: Value = serde_json::from_slice(&diag.stdout).unwrap();
    assert!(v["diagnostics"]["ksd"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,x2,g1,f_a\n1,2,3,4\n").unwrap();
    let out = secf(&["estimate", "--samples", s(&bad), "--integrand", "a"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gradient column count mismatch"));

    // four points cannot support the six-term quadratic family in d = 2
    let small = dir.path().join("small.csv");
    std::fs::write(&small, "x1,x2,g1,g2,f_a\n0,0,0,0,1\n1,0,-1,0,2\n0,1,0,-1,3\n1,1,-1,-1,4\n").unwrap();
    let out = secf(&["estimate", "--samples", s(&small), "--integrand", "a", "--order", "2", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = secf(&["estimate", "--samples", s(&small), "--integrand", "missing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gaussian_benchmark_report() {
    let out = secf(&["benchmark", "gaussian", "--d", "3", "--n", "40", "--replicates", "2", "--methods", "mc,zv,secf", "--lambda", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let methods = v["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 3);
    assert_eq!(methods[0]["statistical_efficiency"].as_f64(), Some(1.0));
    assert_eq!(v["truth"].as_f64(), Some(1.0));
}

#[test]
fn capture_recapture_chain() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("cjs.csv");
    std::fs::write(
        &table,
        "released,y1,y2,y3,y4\n100,0,40,12,4\n90,0,0,45,10\n80,0,0,0,50\n",
    )
    .unwrap();
    let samples = dir.path().join("s.csv");
    let out = secf(&["sample", "--target", "cjs", "--data", s(&table), "--n", "300", "--burn-in", "100", "--step", "0.5", "--out", s(&samples)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = secf::load_samples(&samples).unwrap();
    assert_eq!(loaded.dim(), 5);
    assert!(loaded.integrand("x1").unwrap().iter().all(|&v| v > 0.0 && v < 1.0));

    let out = secf(&[
        "benchmark", "chain", "--target", "cjs", "--data", s(&table), "--sampler", "ula", "--n", "200", "--step", "0.3",
        "--integrand", "coord:1", "--gold", "0.5", "--replicates", "1", "--methods", "mc",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["sampler"], "ula");

    let out = secf(&["sample", "--target", "cjs", "--n", "10", "--step", "0.5", "--out", s(&samples)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn logistic_chain() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.csv");
    let mut text = String::from("a,b,y\n");
    for i in 0..60 {
        let a = (i % 7) as f64 - 3.0;
        let b = ((i * 5) % 11) as f64 / 5.0;
        text.push_str(&format!("{a},{b},{}\n", u8::from(a + b > 0.5)));
    }
    std::fs::write(&design, text).unwrap();
    let out = secf(&[
        "benchmark", "chain", "--target", "logistic", "--data", s(&design), "--n", "300", "--burn-in", "100", "--step", "0.3",
        "--integrand", "predictive:1,0.5,-0.5", "--gold", "0.5", "--replicates", "2", "--methods", "mc,zv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
