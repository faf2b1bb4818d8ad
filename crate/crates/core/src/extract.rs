//! Schema extraction from instance data.
//!
//! Nodes are typed by their full label set and edges by (edge labels,
//! source type, target type). Every extracted schema validates the graph it
//! came from.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::graph::{PropertyGraph, PropertyValue};
use crate::schema::{
    least_common_supertype, Cardinality, DataType, EdgeKey, EdgeType, LabelSet, NodeType,
    PropertyDef, SchemaGraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionOptions {
    pub infer_cardinality: bool,
    pub infer_subtypes: bool,
    /// Carried alongside the schema for pairing with conformance checks;
    /// extraction itself does not read it.
    pub open_world: bool,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            infer_cardinality: true,
            infer_subtypes: false,
            open_world: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("cannot infer a datatype from zero values")]
    NoValues,
}

pub fn infer_property_type<'a, I>(values: I) -> Result<DataType, InferenceError>
where
    I: IntoIterator<Item = &'a PropertyValue>,
{
    values
        .into_iter()
        .map(PropertyValue::datatype)
        .reduce(least_common_supertype)
        .ok_or(InferenceError::NoValues)
}

#[derive(Default)]
struct PropStats {
    // key -> (joined type, occurrences)
    keys: BTreeMap<String, (DataType, usize)>,
    instances: usize,
}

impl PropStats {
    fn observe(&mut self, props: &BTreeMap<String, PropertyValue>) {
        self.instances += 1;
        for (key, value) in props {
            self.keys
                .entry(key.clone())
                .and_modify(|(t, n)| {
                    *t = least_common_supertype(*t, value.datatype());
                    *n += 1;
                })
                .or_insert((value.datatype(), 1));
        }
    }

    fn definitions(&self) -> Vec<PropertyDef> {
        self.keys
            .iter()
            .map(|(key, &(datatype, seen))| PropertyDef::new(key, datatype, seen == self.instances))
            .collect()
    }
}

pub fn extract_schema(g: &PropertyGraph, opts: ExtractionOptions) -> SchemaGraph {
    let mut node_stats: BTreeMap<LabelSet, PropStats> = BTreeMap::new();
    for node in g.nodes() {
        node_stats.entry(node.labels.clone()).or_default().observe(&node.properties);
    }

    let mut edge_stats: BTreeMap<EdgeKey, PropStats> = BTreeMap::new();
    // per edge key: endpoint node id -> degree
    let mut out_deg: HashMap<&EdgeKey, HashMap<&str, u64>> = HashMap::new();
    let mut in_deg: HashMap<&EdgeKey, HashMap<&str, u64>> = HashMap::new();
    let mut keyed = Vec::with_capacity(g.edge_count());
    for edge in g.edges() {
        let (Some(src), Some(dst)) = (g.node(&edge.src), g.node(&edge.dst)) else {
            continue;
        };
        let key = EdgeKey::new(edge.labels.clone(), src.labels.clone(), dst.labels.clone());
        edge_stats.entry(key.clone()).or_default().observe(&edge.properties);
        keyed.push((key, edge));
    }
    for (key, edge) in &keyed {
        *out_deg.entry(key).or_default().entry(edge.src.as_str()).or_default() += 1;
        *in_deg.entry(key).or_default().entry(edge.dst.as_str()).or_default() += 1;
    }

    let mut nodes: Vec<NodeType> = node_stats
        .iter()
        .map(|(labels, stats)| {
            NodeType::new(String::new(), labels.clone()).with_properties(stats.definitions())
        })
        .collect();
    nodes.sort_by_cached_key(NodeType::display_name);
    let mut ids: HashMap<LabelSet, String> = HashMap::new();
    for (i, node) in nodes.iter_mut().enumerate() {
        node.id = format!("n{}", i + 1);
        ids.insert(node.labels.clone(), node.id.clone());
    }

    let degree_range = |key: &EdgeKey, endpoint: &LabelSet, degrees: &HashMap<&str, u64>| {
        let mut min = u64::MAX;
        let mut max = 0;
        for node in g.nodes().filter(|n| &n.labels == endpoint) {
            let d = degrees.get(node.id.as_str()).copied().unwrap_or(0);
            min = min.min(d);
            max = max.max(d);
        }
        debug_assert!(max > 0, "edge type {key} observed without edges");
        Cardinality {
            min,
            max: Some(max),
        }
    };

    let mut edge_list: Vec<(EdgeKey, &PropStats)> =
        edge_stats.iter().map(|(k, s)| (k.clone(), s)).collect();
    edge_list.sort_by_cached_key(|(k, _)| {
        (k.labels.display_name(), k.src.display_name(), k.dst.display_name())
    });
    let edges = edge_list
        .into_iter()
        .enumerate()
        .map(|(i, (key, stats))| {
            let (out_card, in_card) = if opts.infer_cardinality {
                (
                    degree_range(&key, &key.src, &out_deg[&key]),
                    degree_range(&key, &key.dst, &in_deg[&key]),
                )
            } else {
                (Cardinality::ANY, Cardinality::ANY)
            };
            EdgeType::new(
                format!("e{}", i + 1),
                key.labels.clone(),
                ids[&key.src].clone(),
                ids[&key.dst].clone(),
            )
            .with_properties(stats.definitions())
            .with_cardinality(out_card, in_card)
        })
        .collect();

    let schema = SchemaGraph::new(nodes, edges).expect("extraction yields a consistent schema");
    if opts.infer_subtypes {
        infer_subtypes(&schema)
    } else {
        schema
    }
}

/// Links each type without a supertype to its most specific candidate: a
/// type whose label set is a strict subset and whose required property
/// names are all required here too. Existing links are kept.
pub fn infer_subtypes(s: &SchemaGraph) -> SchemaGraph {
    let (mut nodes, edges) = s.clone().into_parts();
    let required = |n: &NodeType| -> Vec<String> {
        n.properties.iter().filter(|p| p.required).map(|p| p.name.clone()).collect()
    };
    for i in 0..nodes.len() {
        if nodes[i].supertype.is_some() {
            continue;
        }
        let mine = required(&nodes[i]);
        let best = nodes
            .iter()
            .filter(|cand| cand.labels.is_strict_subset(&nodes[i].labels))
            .filter(|cand| required(cand).iter().all(|k| mine.contains(k)))
            .max_by(|a, b| {
                a.labels
                    .len()
                    .cmp(&b.labels.len())
                    .then_with(|| b.display_name().cmp(&a.display_name()))
            })
            .map(|cand| cand.id.clone());
        if let Some(sup) = best {
            if !reaches(&nodes, &sup, &nodes[i].id) {
                nodes[i].supertype = Some(sup);
            }
        }
    }
    SchemaGraph::new(nodes, edges).expect("subtype links keep the schema acyclic")
}

/// True if following supertype links from `from` arrives at `target`.
fn reaches(nodes: &[NodeType], from: &str, target: &str) -> bool {
    let mut cur = Some(from.to_string());
    let mut steps = 0;
    while let Some(id) = cur {
        if id == target {
            return true;
        }
        steps += 1;
        if steps > nodes.len() {
            return false;
        }
        cur = nodes.iter().find(|n| n.id == id).and_then(|n| n.supertype.clone());
    }
    false
}
