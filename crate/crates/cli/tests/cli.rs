use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs-series"))
        .args(args)
        .env_remove("GIBBS_SERIES_MAX_TERMS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn geometric_conjugate() {
    let out = run(&["conjugate", "linear", "--u", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], "gibbs-series/1");
    assert_eq!(v["command"], "conjugate");
    assert_eq!(v["regime"], "Interior");
    let value = v["value"].as_f64().unwrap();
    assert!((value - (-1.0 - 2.0 * std::f64::consts::LN_2)).abs() < 1e-9);
    assert!((v["y"].as_f64().unwrap() + std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn box_ground_state_fit() {
    let out = run(&["fit", "box:1", "--u", "1", "--v", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["status"], "BoundarySingleton");
    assert_eq!(v["entropy"].as_f64(), Some(-1.0));
    let prefix = v["weights"]["prefix"].as_array().unwrap();
    assert_eq!(prefix.len(), 1);
    assert_eq!(prefix[0]["triple"], serde_json::json!([1, 1, 1]));
}

#[test]
fn box_interior_fit() {
    let out = run(&["fit", "box:1", "--u", "1", "--v", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["status"], "InteriorUnique");
    assert!((v["dual_y"].as_f64().unwrap() + 0.718_805_676_352_036).abs() < 1e-8);
}

#[test]
fn empty_domain_exits_two() {
    let out = run(&["eval", "loglog", "--y", "-5", "--p", "0"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["error"], "EmptyDomain");
}

#[test]
fn outside_domain_exits_two() {
    let out = run(&["eval", "logfam:3", "--y", "-0.5", "--p", "0"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["error"], "OutsideDomain");
    assert_eq!(v["domain"]["boundary_class"], "ClosedFiniteSlope");
}

#[test]
fn infeasible_fit_exits_two() {
    let out = run(&["fit", "linear", "--u", "-1", "--v", "1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["status"], "Infeasible");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["conjugate", "linear"])), 1);
    assert_eq!(code(&run(&["eval", "power:-1", "--y", "-1", "--p", "0"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn budget_exhaustion_exits_three() {
    let args = ["eval", "power:0.3", "--y", "-0.001", "--p", "0", "--tol", "1e-14", "--max-terms", "1000"];
    let out = run(&args);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["error"], "BudgetExceeded");
    assert_eq!(v["best"]["truncation_index"], 1000);
}

#[test]
fn term_budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gibbs-series"))
        .args(["eval", "power:0.3", "--y", "-0.001", "--p", "0", "--tol", "1e-14"])
        .env("GIBBS_SERIES_MAX_TERMS", "2000")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["best"]["truncation_index"], 2000);
}

#[test]
fn infinite_values_are_strings() {
    let out = run(&["domain", "linear"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["domain"]["gamma"], "+inf");
    let out = run(&["domain", "loglog"]);
    assert_eq!(json(&out)["domain"]["alpha"], "+inf");
}

#[test]
fn output_is_deterministic() {
    let args = ["fit", "quadratic", "--u", "0.7", "--v", "2.5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let args = ["verify", "c1", "--grid", "6", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn tables_default_to_csv() {
    let out = run(&["table", "example1"]);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "family");
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    let matches = headers.iter().position(|h| h == "matches_expected").unwrap();
    assert!(rows.iter().all(|r| &r[matches] == "true"));
}

#[test]
fn table_as_json() {
    let out = run(&["table", "example2", "--n", "50", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], "gibbs-series/1");
}

#[test]
fn single_claim_verifies() {
    let out = run(&["verify", "c2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["claims"][0]["id"], "c2");
}

#[test]
fn unknown_claim_is_a_usage_error() {
    assert_eq!(code(&run(&["verify", "c42"])), 1);
}
