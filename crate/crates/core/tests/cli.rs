mod common;

use std::process::{Command, Output};

fn tempq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn answers_lennon_and_kennedy() {
    let o = tempq(&["answer", "--graph", common::GRAPH, common::LENNON]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("answers: The_Dakota\n"), "{}", stdout(&o));
    let o = tempq(&["answer", "--graph", common::GRAPH, common::KENNEDY]);
    assert!(stdout(&o).contains("Lyndon_B._Johnson"), "{}", stdout(&o));
}

#[test]
fn gibberish_is_unanswerable() {
    let o = tempq(&["answer", "--graph", common::GRAPH, "blorp zint quaggle?"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "unanswerable");
}

#[test]
fn malformed_benchmark_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"ok1\", \"question\": \"q\", \"answers\": [\"a\"]}\n{\"id\": \"broken7\", \"question\": \"q\"}\n").unwrap();
    let o = tempq(&["evaluate", "--graph", common::GRAPH, "--benchmark", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken7") && err.contains('2'), "{err}");
}

#[test]
fn unknown_structure_is_an_error() {
    let o = tempq(&["answer", "--graph", common::GRAPH, "--disable-is", "9", common::LENNON]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_no_irrelevant_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let o = tempq(&[
        "train", "--graph", common::GRAPH, "--benchmark", common::BENCHMARK,
        "--model", model.to_str().unwrap(), "--sampling-mode", "no-irrelevant",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("IRRELEVANT_NEG: 0"), "{out}");
    assert!(out.contains("POSITIVE: 6"), "{out}");
    let o = tempq(&["evaluate", "--graph", common::GRAPH, "--benchmark", common::BENCHMARK, "--model", model.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["mean"]["f1"].as_f64().is_some(), "{v}");
}

#[test]
fn trace_shows_constraints_and_slots() {
    let t = stdout(&tempq(&["trace", "--graph", common::GRAPH, common::LENNON]));
    assert!(t.contains("Relation(SIMULTANEOUS, \"standing\", \"shot\")"), "{t}");
    let t = stdout(&tempq(&["trace", "--graph", common::GRAPH, common::HENRY]));
    assert!(t.contains("HAS_VALUE_ORDINAL"), "{t}");
    let t = stdout(&tempq(&["trace", "--graph", common::GRAPH, common::FISHBURNE]));
    assert!(t.contains("PART_OF"), "{t}");
}
