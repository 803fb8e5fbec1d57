// Copyright 2026 The pdc-bell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdc-bell"))
        .args(args)
        .env("PDC_BELL_OUT", dir)
        .output()
        .expect("spawn pdc-bell")
}

fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn term(terms: &[Value], occ: [u64; 4]) -> Option<&Value> {
    terms.iter().find(|t| {
        let o: Vec<u64> = t["occupation"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        o == occ
    })
}

#[test]
fn state_on_on_four_photon_coefficient() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["state", "--g", "0.1", "--alpha", "0.3", "--beta", "0.4"],
    );
    let dump = json(tmp.path(), "state.json");
    let terms = dump["terms"].as_array().unwrap();
    let c2 = &term(terms, [1, 1, 1, 1]).unwrap()["coefficients"][2];
    let (re, im) = (-(1.0 + 0.7f64.cos()), -0.7f64.sin());
    assert!((f(&c2[0]) - re).abs() < 1e-14 && (f(&c2[1]) - im).abs() < 1e-14);
    let norm = dump["norm_squared"].as_array().unwrap();
    assert!((f(&norm[4][0]) - (18.0 + 2.0 * 0.7f64.cos())).abs() < 1e-12);
}

#[test]
fn state_off_off_has_six_terms() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["state", "--g", "0.1", "--alice", "off", "--bob", "off"],
    );
    let plain = json(tmp.path(), "state.json");
    assert_eq!(plain["terms"].as_array().unwrap().len(), 6);
    run_ok(
        tmp.path(),
        &[
            "state",
            "--g",
            "0.1",
            "--alice",
            "off",
            "--bob",
            "off",
            "--corrected",
        ],
    );
    // Corrections land on the same six occupations.
    let corrected = json(tmp.path(), "state.json");
    let terms = corrected["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 6);
    let vac = |d: &Value| {
        f(&term(d["terms"].as_array().unwrap(), [0, 0, 0, 0]).unwrap()["coefficients"][4][0])
    };
    assert!((vac(&corrected) - vac(&plain) - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn state_at_zero_coupling_is_vacuum() {
    let tmp = TempDir::new().unwrap();
    run_ok(tmp.path(), &["state", "--g", "0"]);
    let amps = json(tmp.path(), "state.json")["amplitudes"].clone();
    let amps = amps.as_array().unwrap();
    assert_eq!(amps.len(), 1);
    assert_eq!(amps[0]["occupation"], serde_json::json!([0, 0, 0, 0]));
    assert_eq!(f(&amps[0]["amplitude"][0]), 1.0);
}

#[test]
fn ch_maximal_violation_and_none() {
    let tmp = TempDir::new().unwrap();
    let pi = PI.to_string();
    run_ok(tmp.path(), &["ch", "--g", "0.096", "--alpha", &pi]);
    let ch = json(tmp.path(), "ch.json");
    assert!((f(&ch["ch"]) - 8.49e-5).abs() < 0.01e-5, "{ch}");
    assert_eq!(ch["violated"], true);

    run_ok(tmp.path(), &["ch", "--g", "0.096"]);
    assert_eq!(json(tmp.path(), "ch.json")["violated"], false);

    run_ok(
        tmp.path(),
        &["ch", "--g", "0", "--engine", "oracle", "--alpha", &pi],
    );
    let ch = json(tmp.path(), "ch.json");
    assert_eq!(f(&ch["ch"]), 0.0);
    assert_eq!(ch["violated"], false);
}

#[test]
fn degrees_flag_converts_angles() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "ch",
            "--g",
            "0.05",
            "--alpha",
            "90",
            "--beta",
            "90",
            "--degrees",
        ],
    );
    let ch = json(tmp.path(), "ch.json");
    assert!((f(&ch["alpha"]) - PI / 2.0).abs() < 1e-15);
    assert_eq!(ch["violated"], true);
}

#[test]
fn cross_check_failure_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["ch", "--g", "0.5", "--alpha", "3.14159"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutoff"));
    assert!(!tmp.path().join("ch.json").exists());
}

#[test]
fn interference_fit_on_exact_samples() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &[
            "scan",
            "interference",
            "--g",
            "0.05",
            "--points",
            "24",
            "--engine",
            "oracle",
        ],
    );
    let fit = json(tmp.path(), "scan_interference.json")["fit"].clone();
    assert!((f(&fit["visibility"]) - 1.0).abs() < 1e-3, "{fit}");
    let csv = fs::read_to_string(tmp.path().join("scan_interference.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
}

#[test]
fn nosignal_scans() {
    let tmp = TempDir::new().unwrap();
    let g: f64 = 0.05;
    run_ok(
        tmp.path(),
        &["scan", "nosignal", "--g", "0.05", "--corrected"],
    );
    assert!(f(&json(tmp.path(), "scan_nosignal.json")["spread"]) <= 30.0 * g.powi(6));
    run_ok(tmp.path(), &["scan", "nosignal", "--g", "0.05"]);
    let spread = f(&json(tmp.path(), "scan_nosignal.json")["spread"]);
    assert!((spread / (4.0 * g.powi(4)) - 1.0).abs() < 0.1, "{spread}");
}

#[test]
fn visibility_threshold() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["scan", "visibility", "--g", "0.05", "--points", "101"],
    );
    let t = f(&json(tmp.path(), "scan_visibility.json")["threshold"]);
    assert!((t - 0.75).abs() < 0.005, "{t}");
}

#[test]
fn ch_scan_rows_track_closed_form() {
    let tmp = TempDir::new().unwrap();
    run_ok(tmp.path(), &["scan", "ch", "--g", "0.03", "--points", "12"]);
    let csv = fs::read_to_string(tmp.path().join("scan_ch.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("delta,alpha,beta,ch,cross_check,closed_form")
    );
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cols[3] - cols[5]).abs() < 1e-12, "{line}");
    }
}

#[test]
fn lhv_base_model_reproduces_correlations() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["lhv", "--g", "0.1", "--samples", "1000000", "--seed", "3"],
    );
    let s = json(tmp.path(), "lhv_summary.json");
    assert!(
        (f(&s["paper_chsh"]) - 2.0 * 2f64.sqrt()).abs() < 0.05,
        "{}",
        s["paper_chsh"]
    );
    assert!(f(&s["ch"]["value"]) <= 0.0);
    let csv = fs::read_to_string(tmp.path().join("lhv_counts.csv")).unwrap();
    assert!(csv.starts_with("r,s,alpha,beta,count\n"));
    assert!(csv.ends_with("TOTAL,,,,1000000\n"));
    // 16 settings, 8 outcome pairs each.
    assert_eq!(csv.lines().count(), 1 + 16 * 8 + 1);
}

#[test]
fn lhv_coincidence_fractions() {
    let tmp = TempDir::new().unwrap();
    let common = ["--c", "0.5", "--d", "0.5", "--samples", "400000"];
    let mut args = vec!["lhv", "--model", "symmetric"];
    args.extend(common);
    run_ok(tmp.path(), &args);
    let frac = f(&json(tmp.path(), "lhv_summary.json")["postselection"]["coincidence_fraction"]);
    assert!((frac - 2.0 / PI).abs() < 0.005, "{frac}");

    args[2] = "fairpost";
    run_ok(tmp.path(), &args);
    let frac = f(&json(tmp.path(), "lhv_summary.json")["postselection"]["coincidence_fraction"]);
    assert!((frac - 1.0).abs() < 1e-12, "{frac}");
}

#[test]
fn lhv_is_deterministic_per_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["lhv", "--g", "0.1", "--samples", "300000", "--seed", "11"];
    run_ok(a.path(), &args);
    run_ok(b.path(), &args);
    let read = |d: &TempDir, n: &str| fs::read(d.path().join(n)).unwrap();
    assert_eq!(read(&a, "lhv_counts.csv"), read(&b, "lhv_counts.csv"));
    assert_eq!(read(&a, "lhv_summary.json"), read(&b, "lhv_summary.json"));

    run_ok(
        b.path(),
        &["lhv", "--g", "0.1", "--samples", "300000", "--seed", "12"],
    );
    assert_ne!(read(&a, "lhv_counts.csv"), read(&b, "lhv_counts.csv"));
}

#[test]
fn lhv_rejects_bad_parameters() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        run(tmp.path(), &["lhv", "--c", "0.7", "--d", "0.7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(tmp.path(), &["lhv", "--g", "0.4"]).status.code(),
        Some(2)
    );
    assert_eq!(run(tmp.path(), &["lhv"]).status.code(), Some(2));
}

#[test]
fn manifest_checksums_match_outputs() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["lhv", "--g", "0.2", "--samples", "10000", "--seed", "5"],
    );
    let m = json(tmp.path(), "lhv.manifest.json");
    assert_eq!(m["command"], "lhv");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config"]["samples"], 10000);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let bytes = fs::read(tmp.path().join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(
            o["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
}

#[test]
fn oracle_check_default_passes() {
    let tmp = TempDir::new().unwrap();
    run_ok(tmp.path(), &["oracle-check"]);
    for n in [2, 3, 4] {
        assert!(tmp
            .path()
            .join(format!("oracle_check_order{n}.csv"))
            .exists());
    }
    run_ok(
        tmp.path(),
        &["oracle-check", "--orders", "2", "--corrected"],
    );
    let summary = json(tmp.path(), "oracle_check.json");
    assert_eq!(summary[0]["probability_order"], 4);
    assert_eq!(summary[0]["all_pass"], true);
}

#[test]
fn oracle_check_flags_uncorrected_alice_pair() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &["oracle-check", "--orders", "2", "--probability-order", "4"],
    );
    assert_eq!(out.status.code(), Some(1));
    let summary = json(tmp.path(), "oracle_check.json");
    let ev = summary[0]["events"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["event"] == "11**")
        .unwrap()
        .clone();
    assert_eq!(ev["pass"], false);
    assert!((f(&ev["slope"]) - 4.0).abs() < 0.3, "{ev}");
}

#[test]
fn oracle_check_single_coupling_has_no_slope() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["oracle-check", "--orders", "2", "--g-list", "0.1"],
    );
    let csv = fs::read_to_string(tmp.path().join("oracle_check_order2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn paper_chsh_round_trips_counts() {
    let tmp = TempDir::new().unwrap();
    run_ok(
        tmp.path(),
        &["paper-chsh", "--n-tot", "100000", "--visibility", "1"],
    );
    let s = f(&json(tmp.path(), "paper_chsh.json")["s"]);
    assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{s}");
    let counts = tmp.path().join("paper_chsh_counts.csv");
    let counts = counts.to_str().unwrap();
    run_ok(tmp.path(), &["paper-chsh", "--counts", counts]);
    assert_eq!(f(&json(tmp.path(), "paper_chsh.json")["s"]), s);

    run_ok(tmp.path(), &["paper-chsh", "--visibility", "0.5"]);
    let s = f(&json(tmp.path(), "paper_chsh.json")["s"]);
    assert!((s - 2f64.sqrt()).abs() < 1e-3, "{s}");
}

#[test]
fn paper_chsh_rejects_incomplete_counts() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("c.csv");
    fs::write(&path, "r,s,alpha,beta,count\n1,1,0,0,5\nTOTAL,,,,10\n").unwrap();
    let out = run(
        tmp.path(),
        &["paper-chsh", "--counts", path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{ "g": 0.05, "alpha": 1.0, "engine": "oracle" }"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    run_ok(tmp.path(), &["--config", cfg, "ch", "--alpha", "2.0"]);
    let ch = json(tmp.path(), "ch.json");
    assert_eq!(f(&ch["g"]), 0.05);
    assert_eq!(f(&ch["alpha"]), 2.0);
    assert_eq!(ch["engine"], "oracle");
    let m = json(tmp.path(), "ch.manifest.json");
    assert_eq!(m["engine"], "oracle");
    assert_eq!(f(&m["config"]["alpha"]), 2.0);
}

#[test]
fn config_errors_carry_line_and_column() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{\n  \"g\": 0.05,\n  \"gee\": 1\n}\n").unwrap();
    let out = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "ch"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = TempDir::new().unwrap();
    let flag_dir = TempDir::new().unwrap();
    run_ok(
        env_dir.path(),
        &[
            "state",
            "--g",
            "0.1",
            "--out",
            flag_dir.path().to_str().unwrap(),
        ],
    );
    assert!(flag_dir.path().join("state.json").exists());
    assert!(!env_dir.path().join("state.json").exists());
}

#[test]
fn unknown_engine_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["ch", "--g", "0.1", "--engine", "magic"]);
    assert_eq!(out.status.code(), Some(2));
}
