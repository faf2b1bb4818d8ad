mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pgschema::schema::schema_equal;
use pgschema::text::parse_schema;

fn pgschema(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgschema"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.jsonl"), common::PARKING_GRAPH).unwrap();
    dir
}

#[test]
fn extract_then_validate() {
    let dir = fixture();
    let o = pgschema(dir.path(), &["extract", "--graph", "g.jsonl", "--out", "s.pgs"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(
        fs::read_to_string(dir.path().join("s.pgs")).unwrap(),
        "NODE Person { name: STRING, parkingSpot: STRING? }\n"
    );
    let o = pgschema(dir.path(), &["validate", "--graph", "g.jsonl", "--schema", "s.pgs"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["ok"], true);
}

#[test]
fn validate_reports_nonconformance() {
    let dir = fixture();
    fs::write(dir.path().join("s.pgs"), "NODE Person { name: STRING }\n").unwrap();
    let o = pgschema(dir.path(), &["validate", "--graph", "g.jsonl", "--schema", "s.pgs"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("unknown-property"));
    let o = pgschema(dir.path(), &["validate", "--graph", "g.jsonl", "--schema", "s.pgs", "--open-world"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn extract_to_stdout_with_options() {
    let dir = fixture();
    let o = pgschema(dir.path(), &["extract", "--graph", "g.jsonl", "--no-cardinality", "--subtypes"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("NODE Person"));
}

#[test]
fn semantic_diff_of_two_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.pgs"), "NODE Person { name: STRING }\n").unwrap();
    fs::write(dir.path().join("b.pgs"), "NODE Person { name: STRING }\nNODE Employee {}\n").unwrap();
    let o = pgschema(dir.path(), &["diff", "a.pgs", "b.pgs", "--semantic"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "Added node Employee\n");

    let o = pgschema(dir.path(), &["diff", "b.pgs", "a.pgs", "--check-compat"]);
    assert_eq!(code(&o), 3);
    assert_eq!(stdout(&o), "Removed node Employee\n");

    let o = pgschema(dir.path(), &["diff", "a.pgs", "b.pgs", "--json"]);
    let records: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(records[0]["kind"], "AddedNodeType");
    assert_eq!(records[0]["subject"], "Employee");

    let o = pgschema(dir.path(), &["diff", "a.pgs", "b.pgs", "--visual"]);
    assert!(stdout(&o).contains("\"symbol\": \"+\""));

    let o = pgschema(dir.path(), &["diff", "a.pgs", "b.pgs", "--raw"]);
    assert!(stdout(&o).contains("+NODE Employee {}"));
}

#[test]
fn compat_checked_edit_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let original = "NODE Person { name: STRING }\n";
    fs::write(dir.path().join("s.pgs"), original).unwrap();
    let o = pgschema(
        dir.path(),
        &["edit", "s.pgs", "--check-compat", "--json", r#"{"op":"remove-property","type":"Person","key":"name"}"#],
    );
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("removes a property"));
    assert_eq!(fs::read_to_string(dir.path().join("s.pgs")).unwrap(), original);

    let o = pgschema(
        dir.path(),
        &["edit", "s.pgs", "--json", r#"{"op":"remove-property","type":"Person","key":"name"}"#, "--out", "-"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "NODE Person {}\n");
}

#[test]
fn exit_codes_for_bad_input_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.pgs"), "NODE Person { name: NOPE }\n").unwrap();
    fs::write(dir.path().join("bad.jsonl"), "{\"kind\":\"node\"}\n").unwrap();
    let o = pgschema(dir.path(), &["fmt", "bad.pgs"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.pgs:1:"));
    assert_eq!(code(&pgschema(dir.path(), &["extract", "--graph", "bad.jsonl"])), 2);
    assert_eq!(code(&pgschema(dir.path(), &["extract", "--graph", "missing.jsonl"])), 2);
    assert_eq!(code(&pgschema(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&pgschema(dir.path(), &["diff", "--semantic", "--raw", "a", "b"])), 1);
    assert_eq!(code(&pgschema(dir.path(), &["export", "--schema", "bad.pgs", "--format", "xml"])), 1);
    assert_eq!(code(&pgschema(dir.path(), &["--help"])), 0);
}

#[test]
fn fmt_rewrites_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.pgs");
    fs::write(&path, "EDGE (A)-[R]->(A)\n  NODE A{x:INTEGER?,y:STRING}").unwrap();
    assert_eq!(code(&pgschema(dir.path(), &["fmt", "s.pgs", "--check"])), 4);
    assert_eq!(code(&pgschema(dir.path(), &["fmt", "s.pgs"])), 0);
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "NODE A { x: INTEGER?, y: STRING }\n\nEDGE (A)-[R]->(A)\n"
    );
    assert_eq!(code(&pgschema(dir.path(), &["fmt", "s.pgs", "--check"])), 0);
}

#[test]
fn workspace_flow() {
    let dir = fixture();
    let d = dir.path();
    let run = |args: &[&str]| {
        let o = pgschema(d, args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    run(&["extract", "--graph", "g.jsonl", "--out", "s.pgs"]);
    run(&["commit", "--workspace", "ws", "--message", "extracted", "--schema", "s.pgs"]);
    run(&["edit", "--workspace", "ws", "--json", common::SPLIT]);
    run(&["commit", "--workspace", "ws", "-m", "split"]);
    let diff = run(&["diff", "--workspace", "ws", "--from", "1", "--to", "2", "--semantic"]);
    assert_eq!(diff, "Removed node Person\nAdded node Employee\nAdded node Guest\n");
    assert_eq!(run(&["diff", "--workspace", "ws", "--from", "2", "--to", "head"]), "");

    let log: serde_json::Value = serde_json::from_str(&run(&["log", "--workspace", "ws"])).unwrap();
    assert_eq!(log.as_array().unwrap().len(), 2);
    assert_eq!(log[1]["message"], "split");

    run(&["export", "--workspace", "ws", "--format", "pgs", "--out", "out.pgs"]);
    let exported = parse_schema(&fs::read_to_string(d.join("out.pgs")).unwrap()).unwrap();
    let expected = parse_schema("NODE Employee { name: STRING, parkingSpot: STRING }\nNODE Guest { name: STRING }").unwrap();
    assert!(schema_equal(&exported, &expected));

    let json: serde_json::Value = serde_json::from_str(&run(&["export", "--workspace", "ws", "--format", "json"])).unwrap();
    assert_eq!(json["nodeTypes"].as_array().unwrap().len(), 2);

    let o = pgschema(d, &["diff", "--workspace", "ws", "--from", "1", "--to", "9"]);
    assert_eq!(code(&o), 2);
}
