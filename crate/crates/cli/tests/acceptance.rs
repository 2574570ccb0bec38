//! Runs the acceptance suite at the default window through the binary and prints
//! one verdict per criterion.

use std::process::{Command, ExitCode};

use serde_json::Value;

fn verify(seed: u64, out: &std::path::Path) -> (Option<i32>, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_loglattice"))
        .args(["verify", "--seed", &seed.to_string(), "--out"])
        .arg(out)
        .env_remove("LOGLATTICE_MAX_DIM")
        .output()
        .expect("binary runs");
    let text = std::fs::read_to_string(out).expect("report written");
    (o.status.code(), serde_json::from_str(&text).expect("report parses"))
}

/// Items with timing removed, keyed by name.
fn comparable(r: &Value) -> Vec<Value> {
    r["items"]
        .as_array()
        .expect("items")
        .iter()
        .map(|i| {
            let mut i = i.clone();
            i["elapsed_ms"] = Value::Null;
            i
        })
        .collect()
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let (code_a, a) = verify(1, &dir.path().join("a.json"));
    let (code_b, b) = verify(2, &dir.path().join("b.json"));
    let mut verdicts = Vec::new();
    for k in 1..=8 {
        let key = k.to_string();
        let ok = a["criteria"][&key] == Value::Bool(true) && b["criteria"][&key] == Value::Bool(true);
        verdicts.push((k, ok));
    }
    let same_order_free = comparable(&a) == comparable(&b);
    let stable = a["criteria"]["9"] == Value::Bool(true) && b["criteria"]["9"] == Value::Bool(true);
    verdicts.push((9, same_order_free && stable));
    for (k, ok) in &verdicts {
        println!("criterion {k}: {}", if *ok { "PASS" } else { "FAIL" });
    }
    for i in a["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["pass"] != Value::Bool(true))
    {
        println!("  failing item {}: {}", i["name"], i["error"]);
    }
    let all = verdicts.iter().all(|(_, ok)| *ok);
    println!("verify exit codes: {code_a:?}, {code_b:?}");
    if all && code_a == Some(0) && code_b == Some(0) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
