use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_loglattice"));
    c.env_remove("LOGLATTICE_MAX_DIM");
    c
}

fn catalog(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("catalog").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report on stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn kclass_of_exp_one_over_x() {
    let o = run(&["kclass", catalog("exp_1_over_x.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let k = r["items"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["operation"] == "kclass")
        .unwrap();
    let want = serde_json::json!({"rank": 0, "degree": 1});
    assert_eq!(k["outputs"]["rhs"], want);
    assert_eq!(k["outputs"]["lhs"]["class"], want);
}

#[test]
fn irregularity_of_regular_documents_is_zero() {
    let o = run(&["irregularity", catalog("trivial_gm.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = &json(&o)["items"][0]["outputs"];
    assert_eq!(out["total"], 0);
    assert!(out["by_point"].as_object().unwrap().values().all(|v| *v == 0));
    let o = run(&["irregularity", catalog("regular_jordan_third.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = &json(&o)["items"][0]["outputs"];
    assert_eq!(out["irregularity"], 0);
    assert_eq!(out["regular_singular"], true);
    let o = run(&["irregularity", catalog("x_inv_cubed.json").to_str().unwrap()]);
    assert_eq!(json(&o)["items"][0]["outputs"]["irregularity"], 3);
}

#[test]
fn malformed_window_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(catalog("x_inv_cubed.json"))
        .unwrap()
        .replace("\"lo\": [-12]", "\"lo\": [5]")
        .replace("\"hi\": [12]", "\"hi\": [1]");
    let p = write_spec(&dir, "bad.json", &text);
    let o = run(&["cohomology", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("window.lo[0]"), "{}", stderr(&o));
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_spec(
        &dir,
        "bad.json",
        r#"{"mode": "curve", "points": ["0", "inf"], "summands": [{"poles": [{"at": "0", "coeffs": ["1/0"]}]}]}"#,
    );
    let o = run(&["cohomology", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("summands[0].poles[0].coeffs[0]"), "{}", stderr(&o));
    let o = run(&["kclass", catalog("x_inv_cubed.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mode"));
    let o = run(&[
        "cohomology",
        catalog("exp_1_over_x.json").to_str().unwrap(),
        "--delta",
        "1,2,3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--delta"));
    let o = bin()
        .args(["tower", catalog("x_inv_cubed.json").to_str().unwrap()])
        .env("LOGLATTICE_MAX_DIM", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LOGLATTICE_MAX_DIM"));
}

#[test]
fn dimension_cap_is_a_computation_failure() {
    let o = bin()
        .args(["cohomology", catalog("x_inv_cubed.json").to_str().unwrap()])
        .env("LOGLATTICE_MAX_DIM", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let e = r["items"][0]["error"].as_str().unwrap();
    assert!(e.starts_with("alpha:") && e.contains("exceeds cap 10"), "{e}");
}

#[test]
fn twist_flag_and_depth_flag() {
    let p = catalog("kummer_half.json");
    let o = run(&["cohomology", p.to_str().unwrap(), "--delta", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = &json(&o)["items"][0]["outputs"];
    assert_eq!(out["requested_twist"]["hypercohomology"]["h0"], 0);
    let o = run(&["tower", catalog("x_inv_cubed.json").to_str().unwrap(), "--depth", "2"]);
    let out = &json(&o)["items"][0]["outputs"];
    assert_eq!(out["closed_form_equal"].as_array().unwrap().len(), 3);
}

fn strip_timing(mut v: Value) -> Value {
    v["elapsed_ms"] = Value::Null;
    for i in v["items"].as_array_mut().unwrap() {
        i["elapsed_ms"] = Value::Null;
    }
    v
}

#[test]
fn reports_are_deterministic_and_replayable() {
    let p = catalog("x_inv_cubed.json");
    let a = json(&run(&["verify", p.to_str().unwrap()]));
    let b = json(&run(&["verify", p.to_str().unwrap()]));
    assert_eq!(strip_timing(a.clone()), strip_timing(b));
    let names: Vec<&str> = a["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    // the embedded inputs reproduce each item
    let dir = tempfile::tempdir().unwrap();
    let item = &a["items"][0];
    let q = write_spec(&dir, "replay.json", &item["inputs"].to_string());
    let c = json(&run(&["verify", &q]));
    assert_eq!(c["items"][0]["outputs"], item["outputs"]);
}

#[test]
fn stored_reports_render() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "kclass",
        catalog("trivial_gm.json").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("trivial_gm/kclass") && text.contains("PASS"), "{text}");
    let p = write_spec(&dir, "junk.json", r#"{"command": 3}"#);
    assert_eq!(run(&["report", &p]).status.code(), Some(2));
}
