use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use mn_core::exact_arith::rat;
use mn_core::mn_series::{MNElement, MnCtx};

fn mnexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnexp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn verify_exit_codes() {
    let ok = mnexp(&["verify", "--prime", "5", "--id", "thm-harmonic"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("thm-harmonic p=5 PASS\n  k=1: required 1 achieved 1 slack 0\n"));
    assert_eq!(mnexp(&["verify", "--prime", "4", "--all"]).status.code(), Some(2));
    assert_eq!(mnexp(&["verify", "--prime", "3", "--id", "nope"]).status.code(), Some(2));
    assert_eq!(mnexp(&["verify", "--prime", "3"]).status.code(), Some(2));
    assert_eq!(mnexp(&["verify", "--prime", "3", "--id", "it-1", "--all"]).status.code(), Some(2));
    assert_eq!(mnexp(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_method_filter_prints_an_array() {
    let o = mnexp(&["verify", "--prime", "3", "--all", "--method", "congruence", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert!(arr.len() >= 10);
    assert!(arr.iter().all(|r| r["status"] == "PASS" && r["p"] == 3));
}

#[test]
fn uniformizer_prints_its_valuation() {
    let o = mnexp(&["uniformizer", "--prime", "3", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("1/54"));
    assert_eq!(out, golden("uniformizer_p3_m3.txt"));
    let j = mnexp(&["uniformizer", "--prime", "3", "--m", "3", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v["valuation"], "1/54");
    assert_eq!(v["status"], "PASS");
    assert_eq!(mnexp(&["uniformizer", "--prime", "3", "--m", "1"]).status.code(), Some(2));
}

#[test]
fn golden_outputs() {
    let o = mnexp(&["verify", "--prime", "3", "--id", "it-1", "--json"]);
    assert_eq!(stdout(&o), golden("verify_it1_p3.json"));
    let o = mnexp(&["newton", "--prime", "3", "--n", "2", "--steps", "3"]);
    assert_eq!(stdout(&o), golden("newton_p3_n2_s3.txt"));
    let o = mnexp(&["expand", "--name", "lambda", "--prime", "3", "--format", "json"]);
    assert_eq!(stdout(&o), golden("lambda_p3.json"));
}

#[test]
fn expanded_elements_parse_back() {
    let o = mnexp(&["expand", "--name", "lambda", "--prime", "3", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ctx = MnCtx::new(3).unwrap();
    let x = MNElement::from_json(&ctx, &v).unwrap();
    assert_eq!(x.terms(), &[(rat(1, 6), ctx.field().gen())]);
    assert_eq!(x.to_string(), stdout(&mnexp(&["expand", "--name", "lambda", "--prime", "3"])).trim_end());

    let o = mnexp(&["expand", "--name", "zeta-p2-first", "--prime", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s = mn_core::sigma_ring::SigmaElement::from_json(&ctx, &v).unwrap();
    assert_eq!(s.level(), 2);
    assert_eq!(mnexp(&["expand", "--name", "nope", "--prime", "3"]).status.code(), Some(2));
}

#[test]
fn residual_and_newton_json() {
    let o = mnexp(&["residual", "--prime", "3", "--n", "2", "--sigma-terms", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["id"], "residual(n=2,K=2)");
    assert_eq!(v["status"], "PASS");
    let o = mnexp(&["newton", "--prime", "5", "--n", "2", "--steps", "4", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["trace"]["steps"].as_array().unwrap().len(), 4);
    assert_eq!(v["approximation"]["terms"].as_array().unwrap().len(), 4);
}
