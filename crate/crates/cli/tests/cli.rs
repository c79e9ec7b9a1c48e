use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tractoria"))
        .args(args)
        .env("TRACTORIA_THREADS", "2")
        .output()
        .expect("spawn tractoria")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn max_abs(v: &Value) -> f64 {
    match v {
        Value::Array(a) => a.iter().map(max_abs).fold(0.0, f64::max),
        Value::Number(x) => x.as_f64().unwrap().abs(),
        _ => f64::NAN,
    }
}

#[test]
fn flat_obstruction_is_zero() {
    let out = run(&["compute", "--tensor", "obstruction", "--metric", "builtin:flat?n=6", "--point", "0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dim"], 6);
    assert_eq!(v["weight"], -4.0);
    assert_eq!(v["index_convention"], "all indices lowered, row-major nesting");
    let rows = v["components"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 6));
    assert_eq!(max_abs(&v["components"]), 0.0);
    assert_eq!(v["diagnostics"]["pass"], true);
}

#[test]
fn malformed_metric_file_names_the_entry() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"dim": 4, "entries": [["1"], ["0", "1"], ["0", "0", "1 + x9"], ["0", "0", "0", "1"]]}}"#).unwrap();
    let path = format!("file:{}", f.path().display());
    let out = run(&["compute", "--tensor", "bach", "--metric", &path, "--point", "0,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[2][2]"), "{err}");
}

#[test]
fn sphere_is_conformally_flat() {
    let out = run(&["compute", "--tensor", "weyl", "--metric", "builtin:sphere_stereo?n=4,r=1", "--point", "0.1,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(max_abs(&v["components"]) <= 1e-8);
    // the Riemann tensor itself is not zero
    let out = run(&["compute", "--tensor", "riemann", "--metric", "builtin:sphere_stereo?n=4,r=1", "--point", "0.1,0,0,0"]);
    assert!(max_abs(&json(&out)["components"]) > 0.5);
}

#[test]
fn routes_agree_through_the_cli() {
    let base = ["compute", "--tensor", "obstruction", "--metric", "builtin:poly_perturbation?n=6,seed=9,eps=0.1,d=3", "--point", "0.1,-0.2,0,0.1,0,0.05"];
    let direct = json(&run(&base));
    let mut args = base.to_vec();
    args.extend(["--route", "tractor"]);
    let tractor = json(&run(&args));
    let flat = |v: &Value| -> Vec<f64> {
        v["components"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap())).collect()
    };
    let (a, b) = (flat(&direct), flat(&tractor));
    let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d <= 1e-9, "{d}");
    assert!(a.iter().any(|x| x.abs() > 1e-6));
}

#[test]
fn compute_is_deterministic() {
    let args = ["compute", "--tensor", "bach", "--metric", "builtin:poly_perturbation?n=5,seed=2", "--point", "0.1,0.2,0,0,-0.1"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn usage_and_numerical_errors_have_distinct_codes() {
    let cases: [(&[&str], i32); 5] = [
        (&["verify", "--suite", "huge"], 2),
        (&["compute", "--tensor", "weyl", "--metric", "builtin:flat?n=4", "--point", "0,0"], 2),
        (&["compute", "--tensor", "bach", "--metric", "builtin:flat?n=4", "--point", "0,0,0,0", "--degree", "3"], 2),
        (&["compute", "--tensor", "weyl", "--metric", "builtin:nothing?n=4", "--point", "0,0,0,0"], 2),
        // e^{-2000} underflows to zero, so the metric is singular
        (&["compute", "--tensor", "weyl", "--metric", "builtin:conformally_flat?n=4,omega=-1000", "--point", "0,0,0,0"], 3),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn fast_suite_passes() {
    let out = run(&["verify", "--suite", "fast", "--seed", "42"]);
    let v = json(&out);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 20);
    assert!(checks.iter().all(|c| c["passed"] == true));
    let table = String::from_utf8_lossy(&out.stderr);
    assert!(table.lines().count() > checks.len());
}

#[test]
fn exhausted_time_budget_fails() {
    let out = run(&["verify", "--suite", "fast", "--time-budget", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lists_builtins() {
    let out = run(&["list-metrics"]);
    let v = json(&out);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"poly_perturbation") && names.contains(&"einstein_product"));
}

#[test]
fn oversized_dim8_request_is_refused() {
    let point = "0,0,0,0,0,0,0,0";
    let dense = run(&["compute", "--tensor", "obstruction", "--metric", "builtin:poly_perturbation?n=8,seed=1,eps=0.1,d=2", "--point", point]);
    assert_eq!(dense.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&dense.stderr).contains("max-coefficients"));
    let sparse = run(&["compute", "--tensor", "obstruction", "--metric", "builtin:poly_perturbation?n=8,seed=1,eps=0.1,d=2,k=3", "--point", point]);
    assert_eq!(sparse.status.code(), Some(0), "{}", String::from_utf8_lossy(&sparse.stderr));
    assert_eq!(json(&sparse)["diagnostics"]["pass"], true);
}
