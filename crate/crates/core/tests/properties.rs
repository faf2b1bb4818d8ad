mod common;

use pgschema::compat::check_compat;
use pgschema::diff::{apply_diff, compute_diff};
use pgschema::extract::{extract_schema, ExtractionOptions};
use pgschema::graph::{load_graph_str, validate_conformance, ConformanceOptions};
use pgschema::refine::{apply_basic_edit, apply_edit, merge_union, split_node_type, Edit};
use pgschema::schema::{schema_equal, Cardinality, LabelSet, SchemaGraph};
use pgschema::text::{parse_schema, serialize_schema, ElementKind};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn dsl_round_trip_and_idempotence(seed in any::<u64>()) {
        let s = common::random_schema(&mut rng(seed));
        let (text, spans) = serialize_schema(&s);
        let back = parse_schema(&text).unwrap_or_else(|e| panic!("{e:?}\n{text}"));
        prop_assert!(schema_equal(&s, &back), "{text}");
        prop_assert_eq!(&serialize_schema(&back).0, &text);

        prop_assert_eq!(spans.len(), s.node_types().len() + s.edge_types().len());
        let mut last = 0;
        for span in &spans {
            prop_assert!(span.start >= last && span.end > span.start && span.end <= text.len());
            let keyword = match span.kind {
                ElementKind::Node => "NODE ",
                ElementKind::Edge => "EDGE ",
            };
            prop_assert!(text[span.start..].starts_with(keyword));
            last = span.end;
        }
    }

    #[test]
    fn parse_errors_point_inside_the_input(seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "[ -~\n]{0,6}") {
        let s = common::random_schema(&mut rng(seed));
        let text = serialize_schema(&s).0;
        let mut at = cut.index(text.len() + 1);
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let broken = format!("{}{junk}{}", &text[..at], &text[at..]);
        if let Err(errors) = parse_schema(&broken) {
            prop_assert!(!errors.is_empty());
            let lines = broken.split('\n').count();
            for e in errors {
                prop_assert!(e.offset <= broken.len(), "{e:?}");
                prop_assert!(e.line >= 1 && e.line <= lines, "{e:?}");
                let line_text = broken.split('\n').nth(e.line - 1).unwrap();
                prop_assert!(e.column >= 1 && e.column <= line_text.chars().count() + 1, "{e:?}");
            }
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,80}") {
        let _ = parse_schema(&text);
    }

    #[test]
    fn diff_patch_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let old = common::random_schema(&mut r);
        let new = if seed % 4 == 0 { common::random_schema(&mut r) } else { common::mutate(&mut r, &old) };
        let d = compute_diff(&old, &new);
        let patched = apply_diff(&old, &d).unwrap_or_else(|e| panic!("{e}"));
        prop_assert!(schema_equal(&patched, &new));
        prop_assert!(compute_diff(&new, &new).is_empty());
        prop_assert_eq!(d.is_empty(), schema_equal(&old, &new));
    }

    #[test]
    fn extraction_is_sound(seed in any::<u64>()) {
        let (_, g) = common::random_graph(&mut rng(seed));
        for opts in [
            ExtractionOptions::default(),
            ExtractionOptions { infer_subtypes: true, ..ExtractionOptions::default() },
        ] {
            let s = extract_schema(&g, opts);
            let report = validate_conformance(&g, &s, ConformanceOptions::default());
            prop_assert!(report.ok, "{:?}", report.violations);
        }
    }

    #[test]
    fn extraction_ignores_line_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (text, g) = common::random_graph(&mut r);
        let mut lines: Vec<&str> = text.lines().collect();
        lines.shuffle(&mut r);
        let shuffled = load_graph_str(&lines.join("\n")).unwrap();
        let a = extract_schema(&g, ExtractionOptions::default());
        let b = extract_schema(&shuffled, ExtractionOptions::default());
        prop_assert!(schema_equal(&a, &b));
        prop_assert_eq!(serialize_schema(&a), serialize_schema(&b));
    }

    #[test]
    fn extracted_cardinalities_are_tight(seed in any::<u64>()) {
        let (_, g) = common::random_graph(&mut rng(seed));
        let s = extract_schema(&g, ExtractionOptions::default());
        for e in s.edge_types() {
            let key = s.key_of(e);
            let typed = |labels: &LabelSet| g.nodes().filter(|n| &n.labels == labels).map(|n| n.id.clone()).collect::<Vec<_>>();
            let matching: Vec<_> = g
                .edges()
                .filter(|x| {
                    x.labels == key.labels
                        && g.node(&x.src).unwrap().labels == key.src
                        && g.node(&x.dst).unwrap().labels == key.dst
                })
                .collect();
            let degree = |ids: Vec<String>, end: fn(&pgschema::graph::GraphEdge) -> &str| {
                let counts: Vec<u64> = ids
                    .iter()
                    .map(|id| matching.iter().filter(|x| end(x) == id).count() as u64)
                    .collect();
                Cardinality::bounded(*counts.iter().min().unwrap(), *counts.iter().max().unwrap())
            };
            prop_assert_eq!(Ok(e.out_card), degree(typed(&key.src), |x| x.src.as_str()));
            prop_assert_eq!(Ok(e.in_card), degree(typed(&key.dst), |x| x.dst.as_str()));
        }
    }

    #[test]
    fn split_then_union_restores(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::plain_schema(&mut r);
        let candidates: Vec<(String, String)> = s
            .node_types()
            .iter()
            .flat_map(|n| n.properties.iter().filter(|p| !p.required).map(move |p| (n.display_name(), p.name.clone())))
            .collect();
        prop_assume!(!candidates.is_empty());
        let (name, key) = candidates.choose(&mut r).unwrap().clone();
        let split = split_node_type(&s, &name, &key, "WithHalf", "WithoutHalf").unwrap();
        let with = split.node_by_name("WithHalf").unwrap();
        prop_assert!(with.property(&key).unwrap().required);
        prop_assert!(split.node_by_name("WithoutHalf").unwrap().property(&key).is_none());
        let back = merge_union(&split, "WithHalf", "WithoutHalf", &name).unwrap();
        prop_assert!(schema_equal(&back, &s), "{}\n{}", pgschema::text::schema_text(&s), pgschema::text::schema_text(&back));
    }

    #[test]
    fn merge_union_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::plain_schema(&mut r);
        let names: Vec<String> = s.node_types().iter().map(|n| n.display_name()).collect();
        prop_assume!(names.len() >= 2);
        let pair: Vec<&String> = names.choose_multiple(&mut r, 2).collect();
        let ab = merge_union(&s, pair[0], pair[1], "Merged");
        let ba = merge_union(&s, pair[1], pair[0], "Merged");
        match (ab, ba) {
            (Ok(ab), Ok(ba)) => prop_assert!(schema_equal(&ab, &ba)),
            (ab, ba) => prop_assert_eq!(ab.is_err(), ba.is_err()),
        }
    }

    #[test]
    fn compat_gate_is_monotone(seed in any::<u64>(), breaking in any::<bool>()) {
        let mut r = rng(seed);
        let base = common::plain_schema(&mut r);
        let mut s = base.clone();
        let mut fresh = 0;
        for _ in 0..5 {
            if let Some(e) = common::additive_edit(&mut r, &s, &mut fresh) {
                s = apply_basic_edit(&s, &e).unwrap_or_else(|err| panic!("{e:?}: {err}"));
            }
        }
        prop_assert!(check_compat(&compute_diff(&base, &s)).compatible);
        if breaking {
            // additive edits keep every base element and id, so the breaking
            // edit is drawn against the base
            let mut edit = None;
            while edit.is_none() {
                edit = common::breaking_edit(&mut r, &base, &mut fresh);
            }
            let edit = edit.unwrap();
            let after = apply_basic_edit(&s, &edit).unwrap_or_else(|err| panic!("{edit:?}: {err}"));
            let report = check_compat(&compute_diff(&base, &after));
            prop_assert!(!report.compatible, "{edit:?}");
            prop_assert!(!report.violations.is_empty());
        }
    }
}

#[test]
fn edit_json_matches_library_call() {
    let s = parse_schema("NODE Person { name: STRING, parkingSpot: STRING? }").unwrap();
    let via_json = apply_edit(&s, &Edit::from_json(common::SPLIT).unwrap()).unwrap();
    let direct = split_node_type(&s, "Person", "parkingSpot", "Employee", "Guest").unwrap();
    assert!(schema_equal(&via_json, &direct));
}

#[test]
fn extraction_of_an_empty_graph_is_empty() {
    let g = load_graph_str("").unwrap();
    let s = extract_schema(&g, ExtractionOptions::default());
    assert!(schema_equal(&s, &SchemaGraph::empty()));
}
