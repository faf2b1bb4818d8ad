//! Property-graph instance data: loading from JSON lines and checking
//! instances against a schema.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::schema::{DataType, EdgeKey, LabelSet, PropertyDef, SchemaGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    String(String),
    Integer(i64),
    Float(f64),
    Boolean(bool),
    Date(NaiveDate),
}

impl PropertyValue {
    pub fn datatype(&self) -> DataType {
        match self {
            PropertyValue::String(_) => DataType::String,
            PropertyValue::Integer(_) => DataType::Integer,
            PropertyValue::Float(_) => DataType::Float,
            PropertyValue::Boolean(_) => DataType::Boolean,
            PropertyValue::Date(_) => DataType::Date,
        }
    }

    /// Maps a scalar JSON value. Strings shaped `YYYY-MM-DD` that name a real
    /// calendar date become dates; integral numbers in `i64` range become
    /// integers.
    pub fn from_json(value: &Value) -> Result<PropertyValue, String> {
        match value {
            Value::String(s) => Ok(parse_date(s)
                .map(PropertyValue::Date)
                .unwrap_or_else(|| PropertyValue::String(s.clone()))),
            Value::Bool(b) => Ok(PropertyValue::Boolean(*b)),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    return Ok(PropertyValue::Integer(i));
                }
                let f = n.as_f64().ok_or_else(|| format!("unrepresentable number {n}"))?;
                if f.fract() == 0.0 && f >= i64::MIN as f64 && f < i64::MAX as f64 {
                    Ok(PropertyValue::Integer(f as i64))
                } else {
                    Ok(PropertyValue::Float(f))
                }
            }
            Value::Null => Err("null is not a property value".into()),
            Value::Array(_) => Err("arrays are not property values".into()),
            Value::Object(_) => Err("nested objects are not property values".into()),
        }
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    let shaped = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shaped {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::String(s) => write!(f, "{s:?}"),
            PropertyValue::Integer(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => write!(f, "{x}"),
            PropertyValue::Boolean(b) => write!(f, "{b}"),
            PropertyValue::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: String,
    pub labels: LabelSet,
    pub properties: BTreeMap<String, PropertyValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub labels: LabelSet,
    pub properties: BTreeMap<String, PropertyValue>,
}

/// An immutable, referentially valid property graph. Elements are keyed by
/// id, so the value does not depend on input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyGraph {
    nodes: BTreeMap<String, GraphNode>,
    edges: BTreeMap<String, GraphEdge>,
}

impl PropertyGraph {
    pub fn new(nodes: Vec<GraphNode>, edges: Vec<GraphEdge>) -> Result<Self, GraphError> {
        let mut problems = Vec::new();
        let mut node_map = BTreeMap::new();
        for node in nodes {
            if node.id.is_empty() {
                problems.push(GraphProblem::new(None, "node id must be non-empty"));
            } else if node_map.contains_key(&node.id) {
                problems.push(GraphProblem::new(None, format!("duplicate node id `{}`", node.id)));
            } else {
                node_map.insert(node.id.clone(), node);
            }
        }
        let mut edge_map = BTreeMap::new();
        for edge in edges {
            check_endpoints(&node_map, &edge, None, &mut problems);
            if edge_map.contains_key(&edge.id) {
                problems.push(GraphProblem::new(None, format!("duplicate edge id `{}`", edge.id)));
            } else {
                edge_map.insert(edge.id.clone(), edge);
            }
        }
        if problems.is_empty() {
            Ok(PropertyGraph {
                nodes: node_map,
                edges: edge_map,
            })
        } else {
            Err(GraphError { problems })
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.values()
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

fn check_endpoints(
    nodes: &BTreeMap<String, GraphNode>,
    edge: &GraphEdge,
    line: Option<usize>,
    problems: &mut Vec<GraphProblem>,
) {
    for (role, id) in [("src", &edge.src), ("dst", &edge.dst)] {
        if !nodes.contains_key(id) {
            problems.push(GraphProblem::new(
                line,
                format!("edge `{}` {role} references unknown node id `{id}`", edge.id),
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphProblem {
    pub line: Option<usize>,
    pub message: String,
}

impl GraphProblem {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        GraphProblem {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for GraphProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found while loading a graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct GraphError {
    pub problems: Vec<GraphProblem>,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid graph ({} problem(s))", self.problems.len())?;
        for p in &self.problems {
            write!(f, "\n  {p}")?;
        }
        Ok(())
    }
}

/// Reads a graph from JSON lines. Blank lines are skipped; every problem in
/// the stream is collected before failing.
pub fn load_graph<R: BufRead>(source: R) -> Result<PropertyGraph, GraphError> {
    let mut problems = Vec::new();
    let mut nodes: BTreeMap<String, GraphNode> = BTreeMap::new();
    let mut edges: Vec<(usize, GraphEdge)> = Vec::new();
    let mut edge_ids: HashMap<String, usize> = HashMap::new();

    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                problems.push(GraphProblem::new(Some(lineno), format!("unreadable line: {e}")));
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Err(msg) => problems.push(GraphProblem::new(Some(lineno), msg)),
            Ok(Element::Node(node)) => {
                if nodes.contains_key(&node.id) {
                    problems.push(GraphProblem::new(
                        Some(lineno),
                        format!("duplicate node id `{}`", node.id),
                    ));
                } else {
                    nodes.insert(node.id.clone(), node);
                }
            }
            Ok(Element::Edge(edge)) => {
                if let Some(first) = edge_ids.get(&edge.id) {
                    problems.push(GraphProblem::new(
                        Some(lineno),
                        format!("duplicate edge id `{}` (first on line {first})", edge.id),
                    ));
                } else {
                    edge_ids.insert(edge.id.clone(), lineno);
                    edges.push((lineno, edge));
                }
            }
        }
    }
    for (lineno, edge) in &edges {
        check_endpoints(&nodes, edge, Some(*lineno), &mut problems);
    }
    if !problems.is_empty() {
        problems.sort_by_key(|p| p.line);
        return Err(GraphError { problems });
    }
    Ok(PropertyGraph {
        nodes,
        edges: edges.into_iter().map(|(_, e)| (e.id.clone(), e)).collect(),
    })
}

pub fn load_graph_str(text: &str) -> Result<PropertyGraph, GraphError> {
    load_graph(text.as_bytes())
}

enum Element {
    Node(GraphNode),
    Edge(GraphEdge),
}

fn parse_line(line: &str) -> Result<Element, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj = value.as_object().ok_or("expected a JSON object")?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or("missing string field `kind`")?;
    let id = string_field(obj, "id")?;
    if id.is_empty() {
        return Err("`id` must be non-empty".into());
    }
    let labels = match obj.get("labels") {
        None => LabelSet::default(),
        Some(Value::Array(items)) => {
            let mut labels = Vec::with_capacity(items.len());
            for item in items {
                labels.push(item.as_str().ok_or("labels must be strings")?.to_string());
            }
            LabelSet::new(labels)
        }
        Some(_) => return Err("`labels` must be an array of strings".into()),
    };
    let mut properties = BTreeMap::new();
    match obj.get("properties") {
        None => {}
        Some(Value::Object(map)) => {
            for (key, v) in map {
                let pv = PropertyValue::from_json(v).map_err(|e| format!("property `{key}`: {e}"))?;
                properties.insert(key.clone(), pv);
            }
        }
        Some(_) => return Err("`properties` must be an object".into()),
    }
    match kind {
        "node" => Ok(Element::Node(GraphNode {
            id,
            labels,
            properties,
        })),
        "edge" => Ok(Element::Edge(GraphEdge {
            id,
            src: string_field(obj, "src")?,
            dst: string_field(obj, "dst")?,
            labels,
            properties,
        })),
        other => Err(format!("unknown kind `{other}`")),
    }
}

fn string_field(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String, String> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| format!("missing string field `{key}`"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    UnknownType,
    MissingRequiredProperty,
    WrongDatatype,
    UnknownProperty,
    EndpointMismatch,
    CardinalityViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub element: String,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ConformanceReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ConformanceReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConformanceOptions {
    /// Accept properties the schema does not declare.
    pub open_world: bool,
}

/// Checks every node and edge against the schema. Nodes are typed by exact
/// label-set match; problems become report entries, never errors.
pub fn validate_conformance(
    graph: &PropertyGraph,
    schema: &SchemaGraph,
    opts: ConformanceOptions,
) -> ConformanceReport {
    let mut violations = Vec::new();
    let node_types: HashMap<&LabelSet, &crate::schema::NodeType> =
        schema.node_types().iter().map(|n| (&n.labels, n)).collect();
    let edge_types: HashMap<EdgeKey, &crate::schema::EdgeType> = schema
        .edge_types()
        .iter()
        .map(|e| (schema.key_of(e), e))
        .collect();

    for node in graph.nodes() {
        match node_types.get(&node.labels) {
            None => violations.push(Violation {
                element: node.id.clone(),
                kind: ViolationKind::UnknownType,
                message: format!("no node type with labels {}", node.labels),
            }),
            Some(ty) => check_properties(
                &node.id,
                &ty.display_name(),
                &node.properties,
                &ty.properties,
                opts,
                &mut violations,
            ),
        }
    }

    // (edge type id, endpoint node id) -> count
    let mut out_counts: HashMap<(&str, &str), u64> = HashMap::new();
    let mut in_counts: HashMap<(&str, &str), u64> = HashMap::new();
    for edge in graph.edges() {
        let src = graph.node(&edge.src).map(|n| &n.labels);
        let dst = graph.node(&edge.dst).map(|n| &n.labels);
        let (Some(src), Some(dst)) = (src, dst) else {
            continue;
        };
        let key = EdgeKey::new(edge.labels.clone(), src.clone(), dst.clone());
        match edge_types.get(&key) {
            Some(ty) => {
                *out_counts.entry((ty.id.as_str(), edge.src.as_str())).or_default() += 1;
                *in_counts.entry((ty.id.as_str(), edge.dst.as_str())).or_default() += 1;
                check_properties(
                    &edge.id,
                    &key.subject(),
                    &edge.properties,
                    &ty.properties,
                    opts,
                    &mut violations,
                );
            }
            None => {
                let label_known = schema.edge_types().iter().any(|e| e.labels == edge.labels);
                if label_known {
                    violations.push(Violation {
                        element: edge.id.clone(),
                        kind: ViolationKind::EndpointMismatch,
                        message: format!(
                            "no edge type {} connects {} to {}",
                            edge.labels, src, dst
                        ),
                    });
                } else {
                    violations.push(Violation {
                        element: edge.id.clone(),
                        kind: ViolationKind::UnknownType,
                        message: format!("no edge type with labels {}", edge.labels),
                    });
                }
            }
        }
    }

    for ty in schema.edge_types() {
        let key = schema.key_of(ty);
        for (counts, endpoint, card, dir) in [
            (&out_counts, &key.src, ty.out_card, "outgoing"),
            (&in_counts, &key.dst, ty.in_card, "incoming"),
        ] {
            if card == crate::schema::Cardinality::ANY {
                continue;
            }
            for node in graph.nodes().filter(|n| &n.labels == endpoint) {
                let count = counts
                    .get(&(ty.id.as_str(), node.id.as_str()))
                    .copied()
                    .unwrap_or(0);
                if !card.admits(count) {
                    violations.push(Violation {
                        element: node.id.clone(),
                        kind: ViolationKind::CardinalityViolation,
                        message: format!(
                            "{count} {dir} {} edge(s), expected {card}",
                            key.subject()
                        ),
                    });
                }
            }
        }
    }
    ConformanceReport::from_violations(violations)
}

fn check_properties(
    element: &str,
    owner: &str,
    values: &BTreeMap<String, PropertyValue>,
    decls: &[PropertyDef],
    opts: ConformanceOptions,
    out: &mut Vec<Violation>,
) {
    for decl in decls {
        match values.get(&decl.name) {
            None if decl.required => out.push(Violation {
                element: element.to_string(),
                kind: ViolationKind::MissingRequiredProperty,
                message: format!("missing required property {owner}.{}", decl.name),
            }),
            None => {}
            Some(v) if !v.datatype().is_subtype_of(decl.datatype) => out.push(Violation {
                element: element.to_string(),
                kind: ViolationKind::WrongDatatype,
                message: format!(
                    "{owner}.{} is {}, declared {}",
                    decl.name,
                    v.datatype(),
                    decl.datatype
                ),
            }),
            Some(_) => {}
        }
    }
    if !opts.open_world {
        for key in values.keys() {
            if !decls.iter().any(|d| &d.name == key) {
                out.push(Violation {
                    element: element.to_string(),
                    kind: ViolationKind::UnknownProperty,
                    message: format!("undeclared property {owner}.{key}"),
                });
            }
        }
    }
}
