//! The command-line binary: exit codes and the report document.

use std::process::Command;

use buchstab_bounds::report::{rederive, BoundsReport, DecimalEnclosure};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_buchstab-bounds"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

// Looser widths keep the full report quick; the bounds still hold.
const QUICK: [&str; 4] = ["--width", "1e-8", "--width-4d", "1e-5"];

fn report_json(path: &std::path::Path) -> (i32, String) {
    let p = path.to_str().unwrap();
    let mut args = vec!["report", "--format", "json", "--out", p];
    args.extend(QUICK);
    let code = run(&args).0;
    (code, std::fs::read_to_string(path).unwrap())
}

fn without_times(s: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
    for t in v["terms"].as_array_mut().unwrap() {
        t["seconds"] = serde_json::Value::Null;
    }
    v
}

#[test]
fn report_round_trips_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (code, a) = report_json(&dir.path().join("a.json"));
    assert_eq!(code, 0, "{a}");
    let (_, b) = report_json(&dir.path().join("b.json"));
    assert_eq!(without_times(&a), without_times(&b));

    let rep = BoundsReport::from_json(&a).unwrap();
    assert!(rep.all_pass);
    assert_eq!(rep.terms.len(), 16);
    let (total, rho) = rederive(&rep).unwrap();
    assert_eq!(DecimalEnclosure::from_enclosure(&total), rep.aggregates.total);
    assert_eq!(DecimalEnclosure::from_enclosure(&rho), rep.aggregates.rho_coefficient);
    assert_eq!(rep.aggregates.solved_tau.unwrap().admissible, "1.3171");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["term", "G2", "--width", "1e-8"]).0, 0);
    // An exponent the fixed sum cannot support.
    let mut args = vec!["report", "--tau", "1.4"];
    args.extend(QUICK);
    assert_eq!(run(&args).0, 1);
    assert_eq!(run(&["term", "G4", "--max-cells", "50"]).0, 1);
    assert_eq!(run(&["term", "G1", "--mode", "fast"]).0, 1);
    assert_eq!(run(&["term", "G1", "--h", "0.3"]).0, 2);
    assert_eq!(run(&["omega", "--u", "11"]).0, 2);
    assert_eq!(run(&["term", "G12"]).0, 2);
}

#[test]
fn legacy_report_and_solve() {
    let mut args = vec!["report", "--tau", "1.312", "--legacy-bounds", "--format", "csv"];
    args.extend(QUICK);
    let (code, out) = run(&args);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().any(|l| l.starts_with("legacy_total,") && l.ends_with("true,,")), "{out}");
    let (code, out) = run(&["solve", "--legacy-bounds"]);
    assert_eq!(code, 0);
    assert!(out.contains("admissible tau: 1.3124"), "{out}");
}

#[test]
fn oracle_and_empirical_commands() {
    let (code, out) = run(&["oracle", "G2", "--samples", "1e5", "--width", "1e-8"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\"verdict\": \"ok\""));
    let (code, out) = run(&["rho-empirical", "--xmax", "1000"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"count\": 719"), "{out}");
}

#[test]
fn omega_table_output() {
    let (code, out) = run(&["omega", "--from", "1", "--to", "10", "--step", "0.25"]);
    assert_eq!(code, 0);
    let rows: Vec<_> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 37);
    for r in rows {
        let f: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1] <= f[2] && f[2] >= 0.5 && f[1] <= 1.0, "{r}");
    }
}
