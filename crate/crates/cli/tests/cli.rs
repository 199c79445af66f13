use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mediankit::{Coord, Factor, Point, ProductInstance, Word};
use mediankit_cli::schema::{load, parse_point};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn mediankit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mediankit")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn result<'a>(r: &'a Value, op: &str) -> &'a Value {
    &r["results"].as_array().unwrap().iter().find(|x| x["op"] == op).unwrap()["result"]
}

#[test]
fn line_translation_report() {
    let out = mediankit(&["run", fixture("line_translation.json").to_str().unwrap(), "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.get("timings").is_none());
    assert_eq!(result(&r, "translation-length")["translation_length"], "1");
    assert_eq!(result(&r, "translation-length")["min_certified"], true);
    assert_eq!(result(&r, "minset")["min"]["set"][0], "0: whole");
}

#[test]
fn stallings_fixture_matches() {
    let out = mediankit(&["run", fixture("f2_a2b2_core.json").to_str().unwrap(), "--window", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(result(&r, "oracle-compare")["verdict"], "MATCH");
    assert!(r["timings"].is_array());
}

#[test]
fn bad_input_exits_one_with_location() {
    let out = mediankit(&["run", fixture("invalid/bad.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("ParseError at line 4"), "{err}");
    for (f, kind) in [("invalid/unknown_op.json", "UnknownRequest"), ("invalid/not_median.json", "SchemaError")] {
        let out = mediankit(&["validate", fixture(f).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1));
        assert!(String::from_utf8(out.stderr).unwrap().starts_with(kind));
    }
    let out = mediankit(&["run", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_controls_mismatch() {
    let out = mediankit(&["run", fixture("negative/corrupted.json").to_str().unwrap(), "--no-timings"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["summary"]["mismatch"], 3);
    let first = &r["results"][0]["result"];
    assert_eq!(first["verdict"], "MISMATCH");
    assert_eq!(first["mismatch"]["item"], "0:cone(a)");
}

#[test]
fn oracle_subcommand_and_out_file() {
    let out = mediankit(&["oracle", fixture("finite.json").to_str().unwrap(), "--name", "finite-graph", "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"].as_array().unwrap().len(), 1);
    assert_eq!(r["results"][0]["result"]["verdict"], "MATCH");

    let out = mediankit(&["oracle", fixture("line_translation.json").to_str().unwrap(), "--name", "nope"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = std::env::temp_dir().join(format!("mediankit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = mediankit(&["run", fixture("z2.json").to_str().unwrap(), "--out", path.to_str().unwrap(), "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(result(&r, "non-transverse")["non_transverse"], false);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn undecided_exits_two() {
    let text = r#"{
        "version": "mediankit/1",
        "instance": { "factors": [{ "kind": "free_tree", "rank": 2 }] },
        "actions": { "A": { "generators": [{ "name": "a", "maps": [{ "tree": { "left": "a" } }] }] } },
        "requests": [{ "op": "oracle-compare", "oracle": "window-core", "action": "A", "window": 2, "bound": 0 }]
    }"#;
    let dir = std::env::temp_dir().join(format!("mediankit-undecided-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("u.json");
    std::fs::write(&path, text).unwrap();
    let out = mediankit(&["run", path.to_str().unwrap(), "--no-timings"]);
    let r = report(&out);
    assert_eq!(out.status.code(), Some(2), "{r}");
    assert_eq!(r["results"][0]["status"], "undecided");
    assert_eq!(r["results"][0]["result"]["bound"], 0);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn every_fixture_loads() {
    for f in ["cube.json", "f2_subgroups.json", "f3_subgroups.json", "finite.json", "flat_torus.json", "mixed.json"] {
        let text = std::fs::read_to_string(fixture(f)).unwrap();
        let l = load(&text).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert!(!l.requests.is_empty());
    }
}

fn coord_json(c: &Coord) -> Value {
    match c {
        Coord::Int(x) => Value::from(*x),
        Coord::Word(w) => Value::from(w.to_string()),
        Coord::Vertex(v) => Value::from(*v),
    }
}

proptest! {
    #[test]
    fn points_roundtrip(x in -50i64..50, letters in proptest::collection::vec(prop_oneof![-2i32..=-1, 1i32..=2], 0..8), v in 0usize..4) {
        let inst = ProductInstance::new(vec![Factor::Line, Factor::FreeTree { rank: 2 }, Factor::Finite(std::sync::Arc::new(mediankit::generate::hypercube(2)))]);
        let p = Point(vec![Coord::Int(x), Coord::Word(Word::new(letters)), Coord::Vertex(v)]);
        let vals: Vec<Value> = p.0.iter().map(coord_json).collect();
        prop_assert_eq!(parse_point(&inst, &vals).unwrap(), p);
    }
}
