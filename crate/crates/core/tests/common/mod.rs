//! Random graphs, schemas and edit sequences shared by the test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use pgschema::graph::{load_graph_str, PropertyGraph};
use pgschema::refine::{BasicEdit, EdgeRef, Owner};
use pgschema::schema::{
    Cardinality, DataType, EdgeKey, LabelSet, NamedEdge, NamedNode, NamedSchema, PropertyDef, SchemaGraph,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

pub const PARKING_GRAPH: &str = r#"{"kind":"node","id":"p1","labels":["Person"],"properties":{"name":"Ada","parkingSpot":"A3"}}
{"kind":"node","id":"p2","labels":["Person"],"properties":{"name":"Alan"}}
"#;

pub const SPLIT: &str =
    r#"{"op":"split","type":"Person","discriminator":"parkingSpot","with":"Employee","without":"Guest"}"#;

const GRAPH_LABELS: [&str; 6] = ["Person", "Employee", "City", "Company", "Tag", "Post"];
const GRAPH_KEYS: [&str; 8] = ["name", "age", "since", "score", "active", "born", "code", "note"];

fn random_value(rng: &mut impl Rng) -> Value {
    match rng.gen_range(0..6) {
        0 => json!(format!("s{}", rng.gen_range(0..100))),
        1 => json!(rng.gen_range(-1000i64..1000)),
        2 => json!(rng.gen_range(-100.0f64..100.0) + 0.5),
        3 => json!(rng.gen_bool(0.5)),
        4 => json!(format!("20{:02}-0{}-1{}", rng.gen_range(0..30), rng.gen_range(1..10), rng.gen_range(0..10))),
        _ => json!("2024-02-30"),
    }
}

/// A JSON-lines graph with at most 50 nodes, 5 label sets and 8 keys.
pub fn random_graph_text(rng: &mut impl Rng) -> String {
    let label_sets: Vec<Vec<&str>> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let n = rng.gen_range(0..=2);
            GRAPH_LABELS.choose_multiple(rng, n).copied().collect()
        })
        .collect();
    let keys = &GRAPH_KEYS[..rng.gen_range(1..=GRAPH_KEYS.len())];
    let n_nodes = rng.gen_range(0..=50);
    let mut lines = Vec::new();
    for i in 0..n_nodes {
        let labels = label_sets.choose(rng).unwrap();
        let mut props = serde_json::Map::new();
        for k in keys {
            if rng.gen_bool(0.5) {
                props.insert(k.to_string(), random_value(rng));
            }
        }
        lines.push(json!({"kind": "node", "id": format!("v{i}"), "labels": labels, "properties": props}).to_string());
    }
    if n_nodes > 0 {
        let edge_labels = ["KNOWS", "LIVES_IN", "WORKS_AT"];
        for i in 0..rng.gen_range(0..=2 * n_nodes) {
            let mut props = serde_json::Map::new();
            for k in keys.iter().take(3) {
                if rng.gen_bool(0.3) {
                    props.insert(k.to_string(), random_value(rng));
                }
            }
            lines.push(
                json!({
                    "kind": "edge",
                    "id": format!("r{i}"),
                    "src": format!("v{}", rng.gen_range(0..n_nodes)),
                    "dst": format!("v{}", rng.gen_range(0..n_nodes)),
                    "labels": [edge_labels.choose(rng).unwrap()],
                    "properties": props,
                })
                .to_string(),
            );
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

pub fn random_graph(rng: &mut impl Rng) -> (String, PropertyGraph) {
    let text = random_graph_text(rng);
    let g = load_graph_str(&text).expect("generated graph loads");
    (text, g)
}

// Includes names that need quoting and keyword-shaped names.
const SCHEMA_LABELS: [&str; 12] = [
    "Person", "Employee", "Guest", "City", "Company", "has space", "back`tick", "_Unlabeled", "NODE", "STRING",
    "Ünïcode", "x-1",
];
const SCHEMA_KEYS: [&str; 10] = ["name", "age", "parkingSpot", "since", "with space", "EDGE", "INTEGER", "k`", "ä", "_"];
const EDGE_LABELS: [&str; 5] = ["KNOWS", "LIVES_IN", "WORKS AT", "EDGE", "r"];

pub fn random_datatype(rng: &mut impl Rng) -> DataType {
    *DataType::ALL.choose(rng).unwrap()
}

fn random_props(rng: &mut impl Rng, max: usize) -> BTreeMap<String, PropertyDef> {
    props_from(rng, &SCHEMA_KEYS, max)
}

fn props_from(rng: &mut impl Rng, keys: &[&str], max: usize) -> BTreeMap<String, PropertyDef> {
    let n = rng.gen_range(0..=max);
    keys.choose_multiple(rng, n)
        .map(|k| (k.to_string(), PropertyDef::new(*k, random_datatype(rng), rng.gen_bool(0.5))))
        .collect()
}

pub fn random_cardinality(rng: &mut impl Rng) -> Cardinality {
    let min = rng.gen_range(0..3);
    match rng.gen_range(0..3) {
        0 => Cardinality::ANY,
        1 => Cardinality::new(min, None).unwrap(),
        _ => Cardinality::bounded(min, (min + rng.gen_range(0..3)).max(1)).unwrap(),
    }
}

fn random_label_set(rng: &mut impl Rng, pool: &[&str]) -> LabelSet {
    let n = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=2) };
    LabelSet::new(pool.choose_multiple(rng, n).copied())
}

pub fn random_named(rng: &mut impl Rng) -> NamedSchema {
    named_from(rng, &SCHEMA_LABELS, &SCHEMA_KEYS, &EDGE_LABELS)
}

fn named_from(rng: &mut impl Rng, labels: &[&str], keys: &[&str], edge_labels: &[&str]) -> NamedSchema {
    let mut s = NamedSchema::default();
    for _ in 0..rng.gen_range(0..=6) {
        let labels = random_label_set(rng, labels);
        let properties = props_from(rng, keys, 4);
        s.nodes.insert(labels, NamedNode { supertype: None, properties });
    }
    // supertypes only point backwards in key order, so there are no cycles
    let names: Vec<LabelSet> = s.nodes.keys().cloned().collect();
    for (i, name) in names.iter().enumerate().skip(1) {
        if rng.gen_bool(0.3) {
            let sup = names[rng.gen_range(0..i)].clone();
            s.nodes.get_mut(name).unwrap().supertype = Some(sup);
        }
    }
    if !names.is_empty() {
        for _ in 0..rng.gen_range(0..=5) {
            let key = EdgeKey::new(
                random_label_set(rng, edge_labels),
                names.choose(rng).unwrap().clone(),
                names.choose(rng).unwrap().clone(),
            );
            let def = NamedEdge {
                properties: props_from(rng, keys, 2),
                out_card: random_cardinality(rng),
                in_card: random_cardinality(rng),
            };
            s.edges.insert(key, def);
        }
    }
    s
}

pub fn random_schema(rng: &mut impl Rng) -> SchemaGraph {
    random_named(rng).to_schema(None).expect("generated schema is valid")
}

/// Like [`random_schema`] but every type is addressable by display name:
/// no empty label sets, no literal `_Unlabeled` or `&` labels.
pub fn plain_schema(rng: &mut impl Rng) -> SchemaGraph {
    let mut s = named_from(rng, &["Person", "City", "Company", "has space"], &SCHEMA_KEYS, &["KNOWS", "LIVES_IN"]);
    s.nodes.retain(|k, _| !k.is_empty());
    s.edges.retain(|k, _| !k.labels.is_empty() && !k.src.is_empty() && !k.dst.is_empty());
    for n in s.nodes.values_mut() {
        if n.supertype.as_ref().is_some_and(LabelSet::is_empty) {
            n.supertype = None;
        }
    }
    if s.nodes.is_empty() {
        s.nodes.insert(LabelSet::new(["Person"]), NamedNode { supertype: None, properties: BTreeMap::new() });
    }
    s.to_schema(None).expect("generated schema is valid")
}

/// A random structural variation of `base`.
pub fn mutate(rng: &mut impl Rng, base: &SchemaGraph) -> SchemaGraph {
    let mut s = base.named();
    for _ in 0..rng.gen_range(0..=6) {
        match rng.gen_range(0..9) {
            0 => {
                if let Some(k) = s.nodes.keys().cloned().collect::<Vec<_>>().choose(rng) {
                    s.nodes.remove(k);
                    s.edges.retain(|e, _| &e.src != k && &e.dst != k);
                    for n in s.nodes.values_mut() {
                        if n.supertype.as_ref() == Some(k) {
                            n.supertype = None;
                        }
                    }
                }
            }
            1 => {
                let labels = random_label_set(rng, &SCHEMA_LABELS);
                s.nodes.entry(labels).or_insert_with(|| NamedNode {
                    supertype: None,
                    properties: random_props(rng, 3),
                });
            }
            2 | 3 => {
                let keys: Vec<LabelSet> = s.nodes.keys().cloned().collect();
                if let Some(k) = keys.choose(rng) {
                    let node = s.nodes.get_mut(k).unwrap();
                    match rng.gen_range(0..3) {
                        0 => node.properties = random_props(rng, 4),
                        1 => {
                            for p in node.properties.values_mut() {
                                p.datatype = random_datatype(rng);
                            }
                        }
                        _ => {
                            for p in node.properties.values_mut() {
                                p.required = !p.required;
                            }
                        }
                    }
                }
            }
            4 => {
                if let Some(k) = s.edges.keys().cloned().collect::<Vec<_>>().choose(rng) {
                    s.edges.remove(k);
                }
            }
            5 | 6 => {
                let keys: Vec<LabelSet> = s.nodes.keys().cloned().collect();
                if !keys.is_empty() {
                    let key = EdgeKey::new(
                        random_label_set(rng, &EDGE_LABELS),
                        keys.choose(rng).unwrap().clone(),
                        keys.choose(rng).unwrap().clone(),
                    );
                    s.edges.insert(
                        key,
                        NamedEdge {
                            properties: random_props(rng, 2),
                            out_card: random_cardinality(rng),
                            in_card: random_cardinality(rng),
                        },
                    );
                }
            }
            7 => {
                for e in s.edges.values_mut() {
                    if rng.gen_bool(0.5) {
                        e.out_card = random_cardinality(rng);
                        e.in_card = random_cardinality(rng);
                        e.properties = random_props(rng, 2);
                    }
                }
            }
            _ => {
                // move one edge to new endpoints, keeping its label
                let keys: Vec<LabelSet> = s.nodes.keys().cloned().collect();
                let edges: Vec<EdgeKey> = s.edges.keys().cloned().collect();
                if let (Some(e), false) = (edges.choose(rng), keys.is_empty()) {
                    let def = s.edges.remove(e).unwrap();
                    let key = EdgeKey::new(
                        e.labels.clone(),
                        keys.choose(rng).unwrap().clone(),
                        keys.choose(rng).unwrap().clone(),
                    );
                    s.edges.insert(key, def);
                }
            }
        }
    }
    // re-derive supertypes that may now form cycles: keep only backward links
    let order: Vec<LabelSet> = s.nodes.keys().cloned().collect();
    for (i, k) in order.iter().enumerate() {
        let node = s.nodes.get_mut(k).unwrap();
        if let Some(sup) = &node.supertype {
            if order.iter().position(|o| o == sup).is_none_or(|p| p >= i) {
                node.supertype = None;
            }
        }
    }
    if rng.gen_bool(0.3) && order.len() > 1 {
        let i = rng.gen_range(1..order.len());
        let sup = order[rng.gen_range(0..i)].clone();
        s.nodes.get_mut(&order[i]).unwrap().supertype = Some(sup);
    }
    s.to_schema(Some(base)).expect("mutated schema is valid")
}

fn widen(rng: &mut impl Rng, t: DataType) -> Option<DataType> {
    let wider: Vec<DataType> = DataType::ALL
        .iter()
        .copied()
        .filter(|w| *w != t && t.is_subtype_of(*w))
        .collect();
    wider.choose(rng).copied()
}

fn owner_of(s: &SchemaGraph, rng: &mut impl Rng) -> Option<(Owner, Vec<PropertyDef>)> {
    let n_nodes = s.node_types().len();
    let total = n_nodes + s.edge_types().len();
    if total == 0 {
        return None;
    }
    let i = rng.gen_range(0..total);
    Some(if i < n_nodes {
        let n = &s.node_types()[i];
        (Owner::node(&n.display_name()), n.properties.clone())
    } else {
        let e = &s.edge_types()[i - n_nodes];
        (Owner::Edge(EdgeRef::Id { id: e.id.clone() }), e.properties.clone())
    })
}

/// An edit that only adds or loosens, or `None` if the draw does not apply.
pub fn additive_edit(rng: &mut impl Rng, s: &SchemaGraph, fresh: &mut usize) -> Option<BasicEdit> {
    *fresh += 1;
    let names: Vec<String> = s.node_types().iter().map(|n| n.display_name()).collect();
    match rng.gen_range(0..7) {
        0 => Some(BasicEdit::AddNode { labels: LabelSet::new([format!("New{fresh}")]) }),
        1 if !names.is_empty() => Some(BasicEdit::AddEdge {
            label: format!("REL{fresh}"),
            src: names.choose(rng)?.clone(),
            dst: names.choose(rng)?.clone(),
        }),
        2 => {
            let (owner, _) = owner_of(s, rng)?;
            Some(BasicEdit::AddProperty {
                owner,
                property: PropertyDef::optional(format!("p{fresh}"), random_datatype(rng)),
            })
        }
        3 => {
            let (owner, props) = owner_of(s, rng)?;
            let p = props.choose(rng)?;
            Some(BasicEdit::SetPropertyType {
                owner,
                key: p.name.clone(),
                datatype: widen(rng, p.datatype)?,
            })
        }
        4 => {
            let (owner, props) = owner_of(s, rng)?;
            let p = props.iter().find(|p| p.required)?;
            Some(BasicEdit::SetRequired {
                owner,
                key: p.name.clone(),
                required: false,
            })
        }
        5 => {
            let e = s.edge_types().choose(rng)?;
            let loosen = |c: &Cardinality| Cardinality::new(c.min.saturating_sub(1), None).unwrap();
            Some(BasicEdit::SetCardinality {
                edge: EdgeRef::Id { id: e.id.clone() },
                out: loosen(&e.out_card),
                inc: loosen(&e.in_card),
            })
        }
        _ => {
            let n = s.node_types().choose(rng)?;
            Some(BasicEdit::SetSupertype {
                name: n.display_name(),
                supertype: None,
            })
        }
    }
}

/// An edit that removes, narrows or tightens something that exists in `s`.
/// Applied to any additive extension of `s`, it still breaks compatibility.
pub fn breaking_edit(rng: &mut impl Rng, s: &SchemaGraph, fresh: &mut usize) -> Option<BasicEdit> {
    *fresh += 1;
    match rng.gen_range(0..6) {
        0 => Some(BasicEdit::RemoveNode {
            name: s.node_types().choose(rng)?.display_name(),
        }),
        1 => {
            let e = s.edge_types().choose(rng)?;
            let key = s.key_of(e);
            Some(BasicEdit::RemoveEdge {
                label: key.labels.display_name(),
                src: key.src.display_name(),
                dst: key.dst.display_name(),
            })
        }
        2 => {
            let (owner, props) = owner_of(s, rng)?;
            Some(BasicEdit::RemoveProperty {
                owner,
                key: props.choose(rng)?.name.clone(),
            })
        }
        3 => {
            let (owner, props) = owner_of(s, rng)?;
            let p = props.choose(rng)?;
            let narrower: Vec<DataType> = DataType::ALL
                .iter()
                .copied()
                .filter(|t| !p.datatype.is_subtype_of(*t))
                .collect();
            Some(BasicEdit::SetPropertyType {
                owner,
                key: p.name.clone(),
                datatype: *narrower.choose(rng)?,
            })
        }
        4 => {
            let (owner, props) = owner_of(s, rng)?;
            let p = props.iter().find(|p| !p.required)?;
            Some(BasicEdit::SetRequired {
                owner,
                key: p.name.clone(),
                required: true,
            })
        }
        _ => {
            let (owner, _) = owner_of(s, rng)?;
            Some(BasicEdit::AddProperty {
                owner,
                property: PropertyDef::required(format!("p{fresh}"), random_datatype(rng)),
            })
        }
    }
}
