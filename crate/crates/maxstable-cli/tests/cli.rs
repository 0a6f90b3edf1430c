//! End-to-end tests of the command-line interface: exit-code contract,
//! determinism, manifest re-execution and input validation.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxstable"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn maxstable")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn sample_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&[
            "sample",
            "--alpha",
            "1",
            "--nu",
            "preset:independence2",
            "--n",
            "5",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ca = fs::read(&a).unwrap();
    assert_eq!(ca, fs::read(&b).unwrap(), "same seed must give same bytes");
    assert_eq!(String::from_utf8_lossy(&ca).lines().count(), 6, "header + 5 rows");
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn rerun_reproduces_outputs_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "sample",
        "--alpha",
        "2",
        "--nu",
        "preset:mixture:0.3:2",
        "--n",
        "4",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(&out).unwrap();
    fs::remove_file(&out).unwrap();
    let manifest = dir.path().join("s.csv.manifest.json");
    let o = run(&["rerun", "--manifest", manifest.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, fs::read(&out).unwrap());
}

#[test]
fn invalid_measure_exits_2_and_names_coordinate() {
    let dir = tempfile::tempdir().unwrap();
    let nu = dir.path().join("bad.json");
    // Moment constraint fails in coordinate 2 (sum 0.5 instead of 1).
    fs::write(
        &nu,
        r#"{"d":2,"norm":"sup","atoms":[
            {"w":1.0,"u":[1.0,0.0]},
            {"w":0.5,"u":[0.0,1.0]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&[
        "sample",
        "--alpha",
        "1",
        "--nu",
        nu.to_str().unwrap(),
        "--n",
        "1",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("coordinate"), "message should name it: {msg}");
}

#[test]
fn semigroup_of_constant_is_one_and_t_zero_is_identity() {
    let o = run(&[
        "semigroup", "--alpha", "1", "--f", "const1", "--t", "5", "--x", "2", "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = run(&[
        "semigroup", "--alpha", "1", "--f", "log", "--t", "0", "--x", "2", "--seed", "1",
    ]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0_f64.ln()).abs() < 1e-12);
}

#[test]
fn semigroup_methods_agree_within_band() {
    let get = |method: &str| -> serde_json::Value {
        let o = run(&[
            "semigroup", "--alpha", "1", "--f", "log", "--t", "1", "--x", "1", "--method", method,
            "--n", "400000", "--seed", "3",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap()
    };
    let q = get("quad");
    let m = get("mc");
    let se = m["std_error"].as_f64().unwrap();
    let diff = (q["value"].as_f64().unwrap() - m["value"].as_f64().unwrap()).abs();
    assert!(diff < 3.0 * se, "quad vs mc: {diff} > 3*{se}");
}

#[test]
fn unknown_catalog_name_lists_functions() {
    let o = run(&[
        "semigroup", "--alpha", "1", "--f", "nope", "--t", "1", "--x", "1", "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("available") && msg.contains("atanlog"), "{msg}");
}

#[test]
fn default_path_emits_four_paths_started_at_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = run(&[
        "path", "--seed", "4", "--steps", "3", "--horizon", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4 * 4, "4 alphas x 4 grid points");
    let starts: Vec<&str> = rows
        .iter()
        .filter(|r| r.split(',').nth(1).unwrap().starts_with("0.0"))
        .cloned()
        .collect();
    assert_eq!(starts.len(), 4);
    for s in starts {
        let x: f64 = s.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(x, 3.0);
    }
}

#[test]
fn path_with_zero_steps_gives_single_row_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = run(&[
        "path", "--alpha", "1,2", "--steps", "0", "--horizon", "1", "--seed", "9", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3, "header + one row per alpha:\n{text}");
}

#[test]
fn verify_covariance_suite_passes() {
    let o = run(&["verify", "--suite", "covariance", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    // Reports plus the trailing manifest line.
    assert!(lines.len() >= 5);
    for l in &lines {
        if l.get("identity").is_some() {
            assert_eq!(l["passed"], true, "{l}");
        }
    }
}

#[test]
fn verify_unknown_suite_exits_2() {
    let o = run(&["verify", "--suite", "nonsense", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_stein_quick_includes_negative_control() {
    let o = run(&[
        "verify", "--suite", "stein", "--seed", "2", "--quick", "--n", "60000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("stein_negative_control_rejected"));
}

fn manifest_outputs(dir: &Path) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".manifest.json")
        })
        .count()
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut vals = Vec::new();
    for threads in ["1", "4"] {
        let o = run(&[
            "--threads", threads, "semigroup", "--alpha", "1", "--f", "log", "--t", "1", "--x",
            "1", "--method", "mc", "--n", "100000", "--seed", "5",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v: serde_json::Value =
            serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
        vals.push(v["value"].as_f64().unwrap());
    }
    assert_eq!(vals[0].to_bits(), vals[1].to_bits());
    assert_eq!(manifest_outputs(dir.path()), 0);
}
