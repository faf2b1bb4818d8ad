//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use pgschema::compat::check_compat;
use pgschema::diff::{apply_diff, compute_diff, render_semantic};
use pgschema::extract::{extract_schema, ExtractionOptions};
use pgschema::graph::{load_graph_str, validate_conformance, ConformanceOptions};
use pgschema::refine::{apply_basic_edit, merge_union, split_node_type};
use pgschema::schema::{schema_equal, DataType, PropertyDef, SchemaGraph};
use pgschema::text::{parse_schema, serialize_schema};
use pgschema::workspace::Workspace;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x5eed_2026;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ratio(ok: usize, n: usize) -> String {
    format!("{ok}/{n}")
}

fn extraction_soundness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let graphs: Vec<_> = (0..200).map(|_| common::random_graph(&mut rng).1).collect();
    let start = Instant::now();
    let ok = graphs
        .iter()
        .filter(|g| {
            let s = extract_schema(g, ExtractionOptions::default());
            validate_conformance(g, &s, ConformanceOptions::default()).ok
        })
        .count();
    let took = start.elapsed();
    outcome(ok == 200 && took < Duration::from_secs(5), format!("{} sound in {took:.2?} (limit 5s)", ratio(ok, 200)))
}

fn extraction_determinism() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let mut fixture = common::random_graph_text(&mut rng);
    while fixture.lines().count() < 30 {
        fixture = common::random_graph_text(&mut rng);
    }
    let mut ok = 0;
    let mut total = 0;
    for text in [common::PARKING_GRAPH.to_string(), fixture] {
        let reference = extract_schema(&load_graph_str(&text).unwrap(), ExtractionOptions::default());
        let mut lines: Vec<&str> = text.lines().collect();
        for _ in 0..50 {
            lines.shuffle(&mut rng);
            let g = load_graph_str(&lines.join("\n")).unwrap();
            total += 1;
            ok += usize::from(schema_equal(&extract_schema(&g, ExtractionOptions::default()), &reference));
        }
    }
    outcome(ok == total, format!("{} shuffles schema_equal", ratio(ok, total)))
}

fn dsl_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let ok = (0..500)
        .filter(|_| {
            let s = common::random_schema(&mut rng);
            let text = serialize_schema(&s).0;
            match parse_schema(&text) {
                Ok(back) => schema_equal(&back, &s) && serialize_schema(&back).0 == text,
                Err(_) => false,
            }
        })
        .count();
    outcome(ok == 500, format!("{} round-trip and idempotent", ratio(ok, 500)))
}

fn parking_spot_scenario() -> Outcome {
    let g = load_graph_str(common::PARKING_GRAPH).unwrap();
    let person = extract_schema(&g, ExtractionOptions::default());
    let extracted_ok = person.node_types().len() == 1
        && person.node_by_name("Person").and_then(|p| p.property("parkingSpot")).cloned()
            == Some(PropertyDef::optional("parkingSpot", DataType::String));

    let split = match split_node_type(&person, "Person", "parkingSpot", "Employee", "Guest") {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("split failed: {e}")),
    };
    let expected = parse_schema("NODE Employee { name: STRING, parkingSpot: STRING }\nNODE Guest { name: STRING }").unwrap();
    let split_ok = schema_equal(&split, &expected);

    let merged_ok = merge_union(&split, "Employee", "Guest", "Person").is_ok_and(|m| schema_equal(&m, &person));
    outcome(
        extracted_ok && split_ok && merged_ok,
        format!("extract STRING?: {extracted_ok}, split Employee/Guest: {split_ok}, union restores: {merged_ok}"),
    )
}

fn diff_patch_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 3);
    let ok = (0..200)
        .filter(|i| {
            let old = common::random_schema(&mut rng);
            let new = if i % 4 == 0 { common::random_schema(&mut rng) } else { common::mutate(&mut rng, &old) };
            apply_diff(&old, &compute_diff(&old, &new)).is_ok_and(|p| schema_equal(&p, &new))
        })
        .count();
    outcome(ok == 200, format!("{} pairs patched to schema_equal", ratio(ok, 200)))
}

fn semantic_templates() -> Outcome {
    let a = parse_schema("NODE Person { age: STRING }").unwrap();
    let b = parse_schema("NODE Person { age: INTEGER }\nNODE Employee {}").unwrap();
    let got = render_semantic(&compute_diff(&a, &b));
    let want = ["Added node Employee", "Changed property type Person.age from string to integer"];
    outcome(got == want, format!("{got:?}"))
}

fn compat_gate() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 4);
    let (mut additive_ok, mut additive_n, mut breaking_ok, mut breaking_n) = (0, 0, 0, 0);
    for i in 0..200 {
        let base: SchemaGraph = common::plain_schema(&mut rng);
        let mut s = base.clone();
        let mut fresh = 0;
        for _ in 0..rng.gen_range(1..=6) {
            if let Some(e) = common::additive_edit(&mut rng, &s, &mut fresh) {
                s = apply_basic_edit(&s, &e).expect("additive edit applies");
            }
        }
        if i % 2 == 0 {
            additive_n += 1;
            additive_ok += usize::from(check_compat(&compute_diff(&base, &s)).compatible);
        } else {
            let edit = loop {
                if let Some(e) = common::breaking_edit(&mut rng, &base, &mut fresh) {
                    break e;
                }
            };
            let after = apply_basic_edit(&s, &edit).expect("breaking edit applies");
            let report = check_compat(&compute_diff(&base, &after));
            breaking_n += 1;
            breaking_ok += usize::from(!report.compatible && !report.violations.is_empty());
        }
    }
    outcome(
        additive_ok == additive_n && breaking_ok == breaking_n,
        format!(
            "additive passed {}, breaking rejected {}",
            ratio(additive_ok, additive_n),
            ratio(breaking_ok, breaking_n)
        ),
    )
}

fn workspace_persistence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 5);
    let histories = 10;
    let mut ok = 0;
    for _ in 0..histories {
        let dir = tempfile::tempdir().unwrap();
        let mut w = Workspace::load(dir.path()).unwrap();
        let mut current = common::random_schema(&mut rng);
        let mut expected = Vec::new();
        for v in 0..20 {
            w.set_head(current.clone()).unwrap();
            w.commit(&format!("version {v}")).unwrap();
            expected.push(current.clone());
            current = common::mutate(&mut rng, &current);
        }
        w.set_head(current.clone()).unwrap();
        w.save().unwrap();
        let loaded = Workspace::load(dir.path()).unwrap();
        let same = loaded.versions().len() == 20
            && loaded
                .versions()
                .iter()
                .zip(&expected)
                .enumerate()
                .all(|(i, (v, s))| v.id == i as u64 + 1 && v.message == format!("version {i}") && schema_equal(&v.schema, s))
            && schema_equal(loaded.head(), &current);
        ok += usize::from(same);
    }
    outcome(ok == histories, format!("{} 20-version histories reloaded", ratio(ok, histories)))
}

fn cli_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.jsonl"), common::PARKING_GRAPH).unwrap();
    let steps: [&[&str]; 6] = [
        &["extract", "--graph", "g.jsonl", "--out", "s.pgs"],
        &["commit", "--workspace", "ws", "--message", "extracted", "--schema", "s.pgs"],
        &["edit", "--workspace", "ws", "--json", common::SPLIT],
        &["commit", "--workspace", "ws", "--message", "split"],
        &["diff", "--workspace", "ws", "--from", "1", "--to", "2", "--semantic"],
        &["export", "--workspace", "ws", "--format", "pgs", "--out", "out.pgs"],
    ];
    let start = Instant::now();
    let mut outputs = Vec::new();
    for args in steps {
        let o = Command::new(env!("CARGO_BIN_EXE_pgschema")).current_dir(d).args(args).output().unwrap();
        if !o.status.success() {
            return outcome(false, format!("{} exited {:?}", args[0], o.status.code()));
        }
        outputs.push(String::from_utf8_lossy(&o.stdout).into_owned());
    }
    let took = start.elapsed();
    let extracted = fs::read_to_string(d.join("s.pgs")).unwrap() == "NODE Person { name: STRING, parkingSpot: STRING? }\n";
    let diff = outputs[4] == "Removed node Person\nAdded node Employee\nAdded node Guest\n";
    let exported = fs::read_to_string(d.join("out.pgs")).unwrap()
        == "NODE Employee { name: STRING, parkingSpot: STRING }\nNODE Guest { name: STRING }\n";
    outcome(
        extracted && diff && exported && took < Duration::from_secs(2),
        format!("exit 0, outputs extract={extracted} diff={diff} export={exported}, {took:.2?} (limit 2s)"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("extraction soundness (200 graphs, < 5 s)", extraction_soundness),
        ("extraction determinism (50 shuffles)", extraction_determinism),
        ("DSL round-trip and idempotence (500 schemas)", dsl_round_trip),
        ("parkingSpot extract/split/merge scenario", parking_spot_scenario),
        ("diff/patch round-trip (200 pairs)", diff_patch_round_trip),
        ("semantic templates verbatim", semantic_templates),
        ("compatibility gate (200 sequences)", compat_gate),
        ("workspace persistence (20-version histories)", workspace_persistence),
        ("CLI end-to-end (< 2 s)", cli_end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        println!("{} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
