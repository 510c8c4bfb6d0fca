// Copyright 2026 The fenchelkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fenchelkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fenchelkit")).args(args).output().unwrap()
}

/// Runs one fixture into `dir`, returning the exit code and the parsed result.
fn run(dir: &Path, name: &str) -> (i32, Option<Value>) {
    let out = dir.join(name.replace(".json", ".result.json"));
    let o = fenchelkit(&["run", fixture(name).to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let result = fs::read_to_string(&out).ok().map(|t| serde_json::from_str(&t).unwrap());
    (o.status.code().unwrap(), result)
}

#[test]
fn the_unit_lp_is_certified_with_equal_values() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run(dir.path(), "lp_unit.json");
    let r = r.unwrap();
    assert_eq!(code, 0);
    assert_eq!(r["status"], "certified");
    assert_eq!(r["values"]["primal"].as_f64(), Some(1.0));
    assert_eq!(r["values"]["dual"].as_f64(), Some(1.0));
    assert_eq!(r["values"]["gap"].as_f64(), Some(0.0));
}

#[test]
fn infeasible_and_unbalanced_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run(dir.path(), "lp_infeasible.json");
    assert_eq!(code, 1);
    assert_eq!(r.unwrap()["status"], "infeasible");
    let (code, r) = run(dir.path(), "ot_unbalanced.json");
    assert_eq!(code, 1);
    let r = r.unwrap();
    assert!(r["diagnostics"]["error"].as_str().unwrap().contains("marginal mismatch"));
}

#[test]
fn malformed_files_exit_with_two_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("truncated.json", r#"{"kind": "lp", "payload": {"c": [1"#),
        ("unknown_kind.json", r#"{"kind": "sdp", "payload": {}}"#),
        ("bad_field.json", r#"{"kind": "lp", "payload": {"c": [1], "a": [[1]], "b": [1], "d": 2}}"#),
        ("bad_shape.json", r#"{"kind": "lp", "payload": {"c": [1, 2], "a": [[1]], "b": [1]}}"#),
    ];
    for (name, text) in cases {
        let input = dir.path().join(name);
        fs::write(&input, text).unwrap();
        let o = fenchelkit(&["run", input.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty(), "{name}");
        assert!(!dir.path().join(name.replace(".json", ".result.json")).exists(), "{name}");
    }
    let o = fenchelkit(&["run", dir.path().join("truncated.json").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1 column"));
}

#[test]
fn results_land_next_to_the_input_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("unit.json");
    fs::copy(fixture("lp_unit.json"), &input).unwrap();
    let o = fenchelkit(&["run", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("unit.result.json").exists());
}

#[test]
fn out_is_refused_for_several_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture("lp_unit.json");
    let o = fenchelkit(&["run", a.to_str().unwrap(), a.to_str().unwrap(), "--out", dir.path().join("x.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emit_prints_csv_series() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), "conjugate_entropy.json");
    run(dir.path(), "ot_sq_line.json");
    run(dir.path(), "flow_path.json");
    let emit = |result: &str, series: &str| fenchelkit(&["emit", dir.path().join(result).to_str().unwrap(), "--series", series]);

    let o = emit("conjugate_entropy.result.json", "dual_curve");
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,conjugate"));
    assert_eq!(lines.clone().count(), 41);
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[1] - (first[0] - 1.0).exp()).abs() < 1e-12);

    let o = emit("ot_sq_line.result.json", "potentials");
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("index,phi,psi"));

    let o = emit("flow_path.result.json", "gap_vs_p");
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);

    let o = emit("flow_path.result.json", "no_such_series");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gap_vs_p"));
}

#[test]
fn emit_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), "flow_path.json");
    let csv = dir.path().join("gap.csv");
    let o = fenchelkit(&[
        "emit",
        dir.path().join("flow_path.result.json").to_str().unwrap(),
        "--series",
        "gap_vs_p",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(csv).unwrap().starts_with("p,"));
}

#[test]
fn parallel_runs_report_the_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["lp_unit.json", "cp_active.json", "lp_infeasible.json", "krnorm_line.json"];
    let inputs: Vec<PathBuf> = names
        .iter()
        .map(|n| {
            let p = dir.path().join(n);
            fs::copy(fixture(n), &p).unwrap();
            p
        })
        .collect();
    let mut args = vec!["run".to_string()];
    args.extend(inputs.iter().map(|p| p.to_string_lossy().into_owned()));
    args.extend(["--jobs".into(), "3".into()]);
    let o = Command::new(env!("CARGO_BIN_EXE_fenchelkit")).args(&args).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    for n in names {
        assert!(dir.path().join(n.replace(".json", ".result.json")).exists(), "{n}");
    }
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), "krnorm_line.json");
    let text = fs::read_to_string(dir.path().join("krnorm_line.result.json")).unwrap();
    assert!(text.contains("\"primal\": 1.5000000000000000e0"), "{text}");
}
