use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn coxinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coxinv")).args(args).output().expect("spawn coxinv")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn fraction(v: &Value) -> f64 {
    let s = v.as_str().expect("fraction string");
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coxinv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn group_info_b2() {
    let v = json(&coxinv(&["group-info", "--group", "B2"]));
    assert_eq!(v["degrees"], serde_json::json!([2, 4]));
    assert_eq!(v["h"], 4);
    assert_eq!(v["d"], 4);
    assert_eq!(v["order"], "8");
}

#[test]
fn eval_b2() {
    let v = json(&coxinv(&["eval", "--group", "B2", "--x", "1,2"]));
    let vals: Vec<f64> = v.as_array().unwrap().iter().map(fraction).collect();
    assert_eq!(vals, vec![5.0, 17.0]);
}

#[test]
fn eval_dihedral_float() {
    let v = json(&coxinv(&["eval", "--group", "I2(5)", "--x", "1,0"]));
    let vals: Vec<f64> = v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((vals[0] - 1.0).abs() < 1e-12);
}

#[test]
fn verify_all_a1_passes() {
    let out = coxinv(&["verify-all", "--group", "A1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(coxinv(&["eval", "--group", "I2(5)", "--exact", "--x", "1,2"]).status.code(), Some(2));
    assert_eq!(coxinv(&["group-info", "--group", "E8"]).status.code(), Some(2));
    assert_eq!(coxinv(&["eval", "--group", "B2", "--x", "1"]).status.code(), Some(2));
    assert_eq!(coxinv(&["eval", "--x", "1,2"]).status.code(), Some(2));
    assert_eq!(coxinv(&["no-such-verb"]).status.code(), Some(2));
    assert_eq!(coxinv(&["probe-regularity", "--group", "B4"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_coxinv"))
        .args(["group-info", "--group", "B2"])
        .env("COXINV_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    let out = coxinv(&["cramer", "--group", "B2", "--x", "0,1", "--grad", "1,1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn jacobian_check_d3() {
    let v = json(&coxinv(&["jacobian-check", "--group", "D3"]));
    assert_eq!(v["residual_norm"], 0.0);
    let b2 = json(&coxinv(&["jacobian-check", "--group", "B2"]));
    assert_eq!(fraction(&b2["c"]), -8.0);
}

#[test]
fn invariants_pretty() {
    let out = coxinv(&["invariants", "--group", "B2", "--pretty"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p1 = x1^2 + x2^2"));
    assert!(text.contains("p2 = x1^4 + x2^4"));
}

#[test]
fn rewrite_b2() {
    let v = json(&coxinv(&["rewrite", "--group", "B2", "--poly", r#"[[[4,0],"1"],[[2,2],"2"],[[0,4],"1"]]"#]));
    assert_eq!(v["pretty"], "p1^2");
}

#[test]
fn compose_then_recover() {
    let path = scratch("composed.json");
    let out = coxinv(&[
        "compose", "--group", "B2", "--poly", r#"[[[1,0],"1"],[[0,1],"2"],[[2,0],"1/3"]]"#,
        "--x", "1,2;0,1;-3,1/2", "--r", "1", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let field: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(field["order"], 4);
    let back = json(&coxinv(&["recover", "--group", "B2", "--input", path.to_str().unwrap(), "--r", "1"]));
    let first = &back["points"][0];
    assert_eq!(first["x"], serde_json::json!(["5/1", "17/1"]));
    let coeffs: Vec<(Value, f64)> = first["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].clone(), fraction(&p[1])))
        .collect();
    // F = y1 + 2 y2 + y1²/3 at (5, 17): ∂1 F = 1 + 10/3, ∂2 F = 2.
    assert!(coeffs.contains(&(serde_json::json!([1, 0]), 13.0 / 3.0)));
    assert!(coeffs.contains(&(serde_json::json!([0, 1]), 2.0)));
}

#[test]
fn cramer_b2() {
    let v = json(&coxinv(&["cramer", "--group", "B2", "--x", "1,2", "--poly", r#"[[[2,0],"1"],[[0,2],"1"],[[4,0],"2"],[[0,4],"2"]]"#]));
    let d: Vec<f64> = v["dF"].as_array().unwrap().iter().map(fraction).collect();
    assert_eq!(d, vec![1.0, 2.0]);
}

#[test]
fn ledger_b2() {
    let v = json(&coxinv(&["ledger", "--group", "B2", "--r", "1"]));
    for e in v["entries"].as_array().unwrap() {
        let b: Vec<u64> = e["beta"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        let continuous = e["verdict"] == "continuous-on-P(R^n)";
        assert_eq!(continuous, 2 * b[0] + 4 * b[1] <= 4, "{e}");
    }
}

#[test]
fn stratify_and_orbit() {
    let s = json(&coxinv(&["stratify", "--group", "B2", "--x", "0,3"]));
    assert_eq!(s["h_s"], 2);
    let o = json(&coxinv(&["orbit", "--group", "D3", "--x", "-1,-2,3"]));
    assert_eq!(o["representative"], serde_json::json!(["3/1", "2/1", "1/1"]));
    assert_eq!(o["size"], 24);
}

#[test]
fn seminorm_of_field() {
    let path = scratch("field.json");
    std::fs::write(&path, r#"{"order":2,"points":[{"x":["0"],"coeffs":[[[0],"0"],[[1],"0"],[[2],"2"]]},{"x":["1"],"coeffs":[[[0],"1"],[[1],"2"],[[2],"2"]]}]}"#).unwrap();
    let v = json(&coxinv(&["seminorm", "--group", "A1", "--float", "--input", path.to_str().unwrap(), "--r", "2"]));
    assert_eq!(v["quotient"].as_f64().unwrap(), 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["probe-regularity", "--group", "B2", "--samples", "300", "--seed", "11"];
    let a = coxinv(&args);
    let b = coxinv(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 11);
}
