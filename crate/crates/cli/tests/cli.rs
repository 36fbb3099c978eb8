use std::process::{Command, Output};

use mcbell::catalog::load_catalog;
use mcbell::lhv::{lhv_bound, DEFAULT_BUDGET};
use mcbell::symmetry::orbit::orbit;
use serde_json::Value;

fn mcbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcbell")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = mcbell(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn lhv_matches_library() {
    let v = json(&["lhv", "--id", "I_2_3"]);
    let rep = lhv_bound(load_catalog().function("I_2_3").unwrap(), DEFAULT_BUDGET).unwrap();
    assert_eq!(v, serde_json::to_value(rep.to_json()).unwrap());
    assert_eq!(json(&["lhv", "--id", "I_2_2"])["bound"], "1");
}

#[test]
fn visibility_of_three_party_function() {
    let v = json(&["visibility", "--id", "I_3_3_1", "--restarts", "16"]);
    assert!((v["vc"].as_f64().unwrap() - 0.6).abs() < 1e-6, "{v}");
}

#[test]
fn orbit_matches_library() {
    let v = json(&["orbit", "--id", "I_2_3"]);
    let o = orbit(load_catalog().function("I_2_3").unwrap(), DEFAULT_BUDGET, false).unwrap();
    assert_eq!(v["size"].as_u64().unwrap() as usize, o.size);
    assert_eq!(o.size, 54);
}

#[test]
fn file_input_round_trip() {
    let f = load_catalog().function("I_2_5").unwrap();
    let path = std::env::temp_dir().join(format!("mcbell-cli-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(f).unwrap()).unwrap();
    let v = json(&["lhv", "--file", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(v["bound"], "1");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mcbell(&["lhv"]).status.code(), Some(2));
    assert_eq!(mcbell(&["lhv", "--id", "I_9_9_9"]).status.code(), Some(2));
    assert_eq!(mcbell(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn failed_verification_exits_one() {
    let out = mcbell(&["verify-candidate", "--id", "I_2_2", "--spectrum=-3/2,-1/4,1", "--vc", "0.7071"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["spectrum_ok"], false);
    let ok = mcbell(&["verify-candidate", "--id", "I_2_5_2", "--spectrum=-3/2,-1/4,1", "--vc", "0.687157"]);
    assert!(ok.status.success());
}

#[test]
fn search_table() {
    let out = mcbell(&["--table", "search", "--seed00", "I_2_3", "--orbit", "I_2_3", "--d", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.6"), "{text}");
}
