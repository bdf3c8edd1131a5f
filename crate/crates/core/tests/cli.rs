use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trigwzw")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn statuses(v: &Value) -> Vec<String> {
    v["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap().to_string()).collect()
}

#[test]
fn factorize_fundamental_sl2() {
    let o = run(&["factorize", "--N", "2", "--k", "1", "--V", "fund", "--points", "2.0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["command"], "factorize");
    assert_eq!(v["results"]["equal"], true);
    assert_eq!(v["results"]["lhs"], v["results"]["rhs"]);
    assert_eq!(v["results"]["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn w_check_order_eight() {
    let o = run(&["w-check", "--N", "3", "--order", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["results"]["pairs"].as_array().unwrap().len(), 8);
    assert!(statuses(&v).iter().all(|s| s == "pass"));
}

#[test]
fn weight_map_sl2_level_one() {
    let o = run(&["weight-map", "--N", "2", "--k", "1", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let t = &v["results"]["lambda_tilde"];
    assert_eq!(t["pairings_zero"]["alpha_0"], "1");
    assert_eq!(t["pairings_zero"]["alpha_1"], "0");
    assert_eq!(t["pairings_infinity"]["alpha_0"], "0");
    assert_eq!(t["pairings_infinity"]["alpha_1"], "1");
    assert_eq!(v["results"]["dominant"], true);
}

#[test]
fn seeded_output_is_reproducible() {
    let a = run(&["cybe", "--N", "2", "--samples", "5", "--seed", "17"]);
    let b = run(&["cybe", "--N", "2", "--samples", "5", "--seed", "17"]);
    let c = run(&["cybe", "--N", "2", "--samples", "5", "--seed", "18"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_and_override() {
    let dir = std::env::temp_dir().join(format!("trigwzw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# sl_3, two points\nN = 3\nk = 1\nV = fund,fund\nsamples = 2\n").unwrap();
    let out = dir.join("out.json");
    let csv = dir.join("out.csv");
    let o = run(&[
        "kz-flatness",
        "--config",
        cfg.to_str().unwrap(),
        "--N",
        "2",
        "--output",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["config"]["N"], 2);
    assert_eq!(v["config"]["samples"], 2);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, v);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(run(&["w-eval", "--N", "2", "--a", "0", "--b", "0", "--u", "2"]).status.code(), Some(2));
    assert_eq!(run(&["factorize", "--N", "2", "--k", "1", "--V", "fund", "--points", "2,-2"]).status.code(), Some(2));
    assert_eq!(run(&["weight-map", "--N", "2"]).status.code(), Some(2));
    assert_eq!(run(&["cybe", "--N", "2", "--config", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn single_level_is_inconclusive() {
    let o = run(&["coinv-dim", "--N", "2", "--k", "1", "--V", "fund", "--points", "2", "--levels", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(statuses(&json(&o)).contains(&"inconclusive".to_string()));
}

#[test]
fn failed_check_exits_one() {
    // a tolerance no computation can meet
    let o = run(&["cybe", "--N", "2", "--samples", "3", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
