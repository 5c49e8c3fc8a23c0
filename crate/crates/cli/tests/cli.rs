use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str = "q,r,nu_minus,log_negativity,fidelity,convention";

fn cvtele(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvtele"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// `key=value` pairs, separated by spaces or newlines.
fn key_values(text: &str) -> BTreeMap<String, String> {
    text.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap()
}

#[test]
fn run_vacuum_point() {
    let o = cvtele(&["run", "--q", "0", "--r", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let kv = key_values(&stdout(&o));
    assert_eq!(num(&kv, "log_negativity"), 0.0);
    assert!((num(&kv, "fidelity") - 0.36075).abs() < 1e-5);
    assert_eq!(kv["convention"], "as-printed");
}

#[test]
fn run_source_only() {
    let o = cvtele(&["run", "--q", "0.5", "--r", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let kv = key_values(&stdout(&o));
    assert!((num(&kv, "nu_pipeline") - 0.78929).abs() < 1e-5);
}

#[test]
fn argument_errors_exit_2() {
    for args in [
        &["run", "--convention", "bogus"][..],
        &["run", "--q", "-1"],
        &["run", "--r", "abc"],
        &["sweep", "--q-steps", "0"],
        &["sweep", "--q-min", "2", "--q-max", "1"],
        &["sweep", "--metric", "bits"],
        &[],
    ] {
        let o = cvtele(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn io_error_exits_3() {
    let o = cvtele(&["sweep", "--q-steps", "2", "--r-steps", "2", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = cvtele(&["run", "--out", "/nonexistent-dir/r.json", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(3));
}

fn sweep_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["sweep", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = cvtele(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn nine_by_nine_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = sweep_to(dir.path(), "s.csv", &["--q-steps", "9", "--r-steps", "9"]);
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 82);
    assert_eq!(lines[0], HEADER);

    let rows: Vec<Vec<f64>> = lines[1..]
        .iter()
        .map(|l| l.split(',').take(5).map(|c| c.parse().unwrap()).collect())
        .collect();
    // q outer, r inner.
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], 0.25 * (i / 9) as f64);
        assert_eq!(row[1], 0.25 * (i % 9) as f64);
    }
    assert_eq!(rows[0][3], 0.0);
    assert!((rows[0][4] - 0.36075).abs() < 1e-5);

    let best = rows
        .iter()
        .max_by(|a, b| a[4].total_cmp(&b[4]))
        .unwrap();
    assert_eq!(best[0], 0.0, "maximum fidelity sits on the q = 0 edge");
}

#[test]
fn sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--q-steps", "11", "--r-steps", "13"];
    let a = sweep_to(dir.path(), "a.csv", &grid);
    let b = sweep_to(dir.path(), "b.csv", &grid);
    let one = sweep_to(dir.path(), "c.csv", &[&grid[..], &["--threads", "1"]].concat());
    let four = sweep_to(dir.path(), "d.csv", &[&grid[..], &["--threads", "4"]].concat());
    assert_eq!(a, b);
    assert_eq!(a, one);
    assert_eq!(a, four);
}

#[test]
fn sweep_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let got = String::from_utf8(sweep_to(dir.path(), "g.csv", &["--q-steps", "3", "--r-steps", "3"])).unwrap();
    let golden = include_str!("golden/sweep_3x3.csv");
    let (got_lines, want_lines): (Vec<&str>, Vec<&str>) = (got.lines().collect(), golden.lines().collect());
    assert_eq!(got_lines.len(), want_lines.len());
    assert_eq!(got_lines[0], want_lines[0]);
    for (g, w) in got_lines[1..].iter().zip(&want_lines[1..]) {
        let (g, w): (Vec<&str>, Vec<&str>) = (g.split(',').collect(), w.split(',').collect());
        assert_eq!(g[5], w[5]);
        for i in 0..5 {
            let (a, b): (f64, f64) = (g[i].parse().unwrap(), w[i].parse().unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "column {i}: {a} vs {b}");
        }
    }
}

#[test]
fn sweep_metric_selection_blanks_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(sweep_to(
        dir.path(),
        "f.csv",
        &["--q-steps", "2", "--r-steps", "2", "--metric", "fidelity"],
    ))
    .unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[3].is_empty());
        assert!(!cells[4].is_empty());
    }
}

fn json_f64(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn run_text_round_trips_from_machine() {
    let args = ["run", "--q", "0.7", "--r", "0.3", "--phi", "0.2", "--convention", "gain-corrected"];
    let text = stdout(&cvtele(&args));
    let machine: Value =
        serde_json::from_str(&stdout(&cvtele(&[&args[..], &["--format", "machine"]].concat()))).unwrap();

    let kv = key_values(&text);
    let cfg = &machine["config"];
    assert_eq!(num(&kv, "q"), json_f64(&cfg["source"]["q"]));
    assert_eq!(num(&kv, "eta"), json_f64(&cfg["source"]["eta"]));
    assert_eq!(num(&kv, "r"), json_f64(&cfg["amplifier"]["r"]));
    assert_eq!(num(&kv, "phi"), json_f64(&cfg["amplifier"]["phi"]));
    assert_eq!(kv["convention"], machine["convention"].as_str().unwrap());
    for key in ["nu_pipeline", "nu_closed_form", "log_negativity", "fidelity"] {
        assert_eq!(num(&kv, key), json_f64(&machine[key]), "{key}");
    }
    for (name, value) in machine["residuals"].as_object().unwrap() {
        assert_eq!(num(&kv, &format!("residual.{name}")), json_f64(value), "{name}");
    }

    // Matrices: the rows following each "name:" line.
    let lines: Vec<&str> = text.lines().collect();
    for name in ["sigma_in", "sigma_shared", "sigma_out"] {
        let start = lines.iter().position(|l| *l == format!("{name}:")).unwrap() + 1;
        let rows = machine[name]["entries"].as_array().unwrap();
        for (i, row) in rows.iter().enumerate() {
            let printed: Vec<f64> = lines[start + i]
                .split_whitespace()
                .map(|c| c.parse().unwrap())
                .collect();
            let stored: Vec<f64> = row.as_array().unwrap().iter().map(json_f64).collect();
            assert_eq!(printed, stored, "{name} row {i}");
        }
    }
}

#[test]
fn verify_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let machine = cvtele(&["verify", "--format", "machine", "--out", path.to_str().unwrap()]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();

    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(names, sorted, "checks are sorted and unique");

    let find = |n: &str| checks.iter().find(|c| c["name"] == n).unwrap();
    assert!(json_f64(&find("tan-limit")["measured"]) < 1e-12);
    assert_eq!(find("eq14-consistency")["status"], "informational");
    assert_eq!(report["resolved_b2_ordering"]["slots"].as_array().unwrap().len(), 6);

    let any_fail = checks.iter().any(|c| c["status"] == "fail");
    assert_eq!(machine.status.code(), Some(if any_fail { 1 } else { 0 }));

    // Text mode carries the same values.
    let text = cvtele(&["verify"]);
    assert_eq!(text.status.code(), machine.status.code());
    let out = stdout(&text);
    for c in checks {
        let name = c["name"].as_str().unwrap();
        let line = out
            .lines()
            .find(|l| l.split_whitespace().nth(1) == Some(name))
            .unwrap();
        let kv = key_values(line);
        for key in ["measured", "expected", "tolerance"] {
            let printed: f64 = kv[key].parse().unwrap();
            let stored = &c[key];
            if stored.is_null() {
                assert!(printed.is_nan());
            } else {
                assert_eq!(printed, json_f64(stored), "{name}.{key}");
            }
        }
    }
}
