//! Schema graph data model.
//!
//! A [`SchemaGraph`] holds node types, edge types and their property
//! declarations. The public identity of a type is its display name (the
//! sorted label set joined by `&`); the `id` fields only correlate
//! selections within a session and never take part in equality.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Display name of a type whose label set is empty.
pub const UNLABELED: &str = "_Unlabeled";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DataType {
    String,
    Integer,
    Float,
    Boolean,
    Date,
    Any,
}

impl DataType {
    pub const ALL: [DataType; 6] = [
        DataType::String,
        DataType::Integer,
        DataType::Float,
        DataType::Boolean,
        DataType::Date,
        DataType::Any,
    ];

    /// Keyword used in schema text.
    pub fn keyword(self) -> &'static str {
        match self {
            DataType::String => "STRING",
            DataType::Integer => "INTEGER",
            DataType::Float => "FLOAT",
            DataType::Boolean => "BOOLEAN",
            DataType::Date => "DATE",
            DataType::Any => "ANY",
        }
    }

    /// Lower-case name used in human-readable sentences.
    pub fn prose(self) -> &'static str {
        match self {
            DataType::String => "string",
            DataType::Integer => "integer",
            DataType::Float => "float",
            DataType::Boolean => "boolean",
            DataType::Date => "date",
            DataType::Any => "any",
        }
    }

    pub fn from_keyword(s: &str) -> Option<DataType> {
        DataType::ALL.into_iter().find(|d| d.keyword() == s)
    }

    /// Lattice order: `self ⊑ other`.
    pub fn is_subtype_of(self, other: DataType) -> bool {
        self == other
            || other == DataType::Any
            || (self == DataType::Integer && other == DataType::Float)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Least upper bound of two datatypes.
pub fn least_common_supertype(a: DataType, b: DataType) -> DataType {
    if a.is_subtype_of(b) {
        b
    } else if b.is_subtype_of(a) {
        a
    } else {
        DataType::Any
    }
}

/// A finite set of labels. Ordering and display are by sorted labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet(BTreeSet<String>);

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LabelSet(labels.into_iter().map(Into::into).collect())
    }

    /// Parses a display name (`A&B`); `_Unlabeled` is the empty set.
    pub fn from_display(name: &str) -> Self {
        if name == UNLABELED || name.is_empty() {
            return LabelSet::default();
        }
        LabelSet::new(name.split('&'))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn is_strict_subset(&self, other: &LabelSet) -> bool {
        self.0.len() < other.0.len() && self.0.is_subset(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }

    pub fn display_name(&self) -> String {
        if self.0.is_empty() {
            UNLABELED.to_string()
        } else {
            self.0.iter().cloned().collect::<Vec<_>>().join("&")
        }
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

impl Serialize for LabelSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            List(Vec<String>),
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Name(name) => LabelSet::from_display(&name),
            Repr::List(list) => LabelSet::new(list),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropertyDef {
    pub name: String,
    #[serde(rename = "type")]
    pub datatype: DataType,
    pub required: bool,
}

impl PropertyDef {
    pub fn new(name: impl Into<String>, datatype: DataType, required: bool) -> Self {
        PropertyDef {
            name: name.into(),
            datatype,
            required,
        }
    }

    pub fn required(name: impl Into<String>, datatype: DataType) -> Self {
        PropertyDef::new(name, datatype, true)
    }

    pub fn optional(name: impl Into<String>, datatype: DataType) -> Self {
        PropertyDef::new(name, datatype, false)
    }
}

/// Edge multiplicity. `max == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cardinality {
    pub min: u64,
    pub max: Option<u64>,
}

impl Cardinality {
    pub const ANY: Cardinality = Cardinality { min: 0, max: None };

    pub fn new(min: u64, max: Option<u64>) -> Result<Self, SchemaError> {
        let card = Cardinality { min, max };
        card.check()?;
        Ok(card)
    }

    pub fn bounded(min: u64, max: u64) -> Result<Self, SchemaError> {
        Cardinality::new(min, Some(max))
    }

    pub fn check(&self) -> Result<(), SchemaError> {
        match self.max {
            Some(0) => Err(SchemaError::InvalidCardinality(*self)),
            Some(max) if max < self.min => Err(SchemaError::InvalidCardinality(*self)),
            _ => Ok(()),
        }
    }

    pub fn admits(&self, count: u64) -> bool {
        count >= self.min && self.max.is_none_or(|max| count <= max)
    }

    /// Smallest cardinality admitting everything either side admits.
    pub fn widen(&self, other: &Cardinality) -> Cardinality {
        let max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Cardinality {
            min: self.min.min(other.min),
            max,
        }
    }

    /// True when every count admitted by `self` is admitted by `other`.
    pub fn within(&self, other: &Cardinality) -> bool {
        let max_ok = match (self.max, other.max) {
            (_, None) => true,
            (Some(a), Some(b)) => a <= b,
            (None, Some(_)) => false,
        };
        self.min >= other.min && max_ok
    }
}

impl Default for Cardinality {
    fn default() -> Self {
        Cardinality::ANY
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "{}..{}", self.min, max),
            None => write!(f, "{}..*", self.min),
        }
    }
}

impl Serialize for Cardinality {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.min, self.max).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Cardinality {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (min, max) = <(u64, Option<u64>)>::deserialize(deserializer)?;
        Cardinality::new(min, max).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeType {
    pub id: String,
    pub labels: LabelSet,
    pub properties: Vec<PropertyDef>,
    pub supertype: Option<String>,
}

impl NodeType {
    pub fn new(id: impl Into<String>, labels: LabelSet) -> Self {
        NodeType {
            id: id.into(),
            labels,
            properties: Vec::new(),
            supertype: None,
        }
    }

    pub fn with_properties(mut self, properties: Vec<PropertyDef>) -> Self {
        self.properties = properties;
        self
    }

    pub fn display_name(&self) -> String {
        self.labels.display_name()
    }

    pub fn property(&self, key: &str) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| p.name == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeType {
    pub id: String,
    pub labels: LabelSet,
    pub src: String,
    pub dst: String,
    pub properties: Vec<PropertyDef>,
    pub out_card: Cardinality,
    pub in_card: Cardinality,
}

impl EdgeType {
    pub fn new(
        id: impl Into<String>,
        labels: LabelSet,
        src: impl Into<String>,
        dst: impl Into<String>,
    ) -> Self {
        EdgeType {
            id: id.into(),
            labels,
            src: src.into(),
            dst: dst.into(),
            properties: Vec::new(),
            out_card: Cardinality::ANY,
            in_card: Cardinality::ANY,
        }
    }

    pub fn with_properties(mut self, properties: Vec<PropertyDef>) -> Self {
        self.properties = properties;
        self
    }

    pub fn with_cardinality(mut self, out_card: Cardinality, in_card: Cardinality) -> Self {
        self.out_card = out_card;
        self.in_card = in_card;
        self
    }

    pub fn property(&self, key: &str) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| p.name == key)
    }
}

/// Name-based identity of an edge type: (labels, source name, target name).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub labels: LabelSet,
    pub src: LabelSet,
    pub dst: LabelSet,
}

impl EdgeKey {
    pub fn new(labels: LabelSet, src: LabelSet, dst: LabelSet) -> Self {
        EdgeKey { labels, src, dst }
    }

    /// `Src-[LABEL]->Dst`, the public name of an edge type.
    pub fn subject(&self) -> String {
        format!("{}-[{}]->{}", self.src, self.labels, self.dst)
    }

    fn sort_key(&self) -> (String, String, String) {
        (
            self.labels.display_name(),
            self.src.display_name(),
            self.dst.display_name(),
        )
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.subject())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("duplicate element id `{0}`")]
    DuplicateId(String),
    #[error("duplicate node type `{0}`")]
    DuplicateNodeType(String),
    #[error("duplicate edge type `{0}`")]
    DuplicateEdgeType(String),
    #[error("edge type `{edge}` references unknown node type id `{id}`")]
    DanglingEndpoint { edge: String, id: String },
    #[error("node type `{node}` references unknown supertype id `{id}`")]
    DanglingSupertype { node: String, id: String },
    #[error("supertype cycle through `{0}`")]
    SupertypeCycle(String),
    #[error("duplicate property `{key}` on `{owner}`")]
    DuplicateProperty { owner: String, key: String },
    #[error("empty property name on `{0}`")]
    EmptyPropertyName(String),
    #[error("invalid cardinality {0}")]
    InvalidCardinality(Cardinality),
}

/// A validated schema. Construct with [`SchemaGraph::new`], which runs the
/// referential-integrity check shared by every producer of schemas.
#[derive(Debug, Clone, Default)]
pub struct SchemaGraph {
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
}

impl SchemaGraph {
    pub fn empty() -> Self {
        SchemaGraph::default()
    }

    pub fn new(node_types: Vec<NodeType>, edge_types: Vec<EdgeType>) -> Result<Self, SchemaError> {
        let schema = SchemaGraph {
            node_types,
            edge_types,
        };
        schema.check()?;
        Ok(schema)
    }

    fn check(&self) -> Result<(), SchemaError> {
        let mut ids = HashSet::new();
        let mut names = HashSet::new();
        for node in &self.node_types {
            if !ids.insert(node.id.as_str()) {
                return Err(SchemaError::DuplicateId(node.id.clone()));
            }
            if !names.insert(&node.labels) {
                return Err(SchemaError::DuplicateNodeType(node.display_name()));
            }
            check_properties(&node.display_name(), &node.properties)?;
        }
        let by_id: HashMap<&str, &NodeType> =
            self.node_types.iter().map(|n| (n.id.as_str(), n)).collect();
        for node in &self.node_types {
            if let Some(sup) = &node.supertype {
                if !by_id.contains_key(sup.as_str()) {
                    return Err(SchemaError::DanglingSupertype {
                        node: node.display_name(),
                        id: sup.clone(),
                    });
                }
            }
        }
        for node in &self.node_types {
            let mut seen = HashSet::new();
            let mut cur = Some(node);
            while let Some(n) = cur {
                if !seen.insert(n.id.as_str()) {
                    return Err(SchemaError::SupertypeCycle(node.display_name()));
                }
                cur = n.supertype.as_deref().and_then(|s| by_id.get(s).copied());
            }
        }
        let mut keys = HashSet::new();
        for edge in &self.edge_types {
            if !ids.insert(edge.id.as_str()) {
                return Err(SchemaError::DuplicateId(edge.id.clone()));
            }
            for endpoint in [&edge.src, &edge.dst] {
                if !by_id.contains_key(endpoint.as_str()) {
                    return Err(SchemaError::DanglingEndpoint {
                        edge: edge.labels.display_name(),
                        id: endpoint.clone(),
                    });
                }
            }
            let key = self.key_of(edge);
            edge.out_card.check()?;
            edge.in_card.check()?;
            check_properties(&key.subject(), &edge.properties)?;
            if !keys.insert(key.clone()) {
                return Err(SchemaError::DuplicateEdgeType(key.subject()));
            }
        }
        Ok(())
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn into_parts(self) -> (Vec<NodeType>, Vec<EdgeType>) {
        (self.node_types, self.edge_types)
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty() && self.edge_types.is_empty()
    }

    pub fn node_by_id(&self, id: &str) -> Option<&NodeType> {
        self.node_types.iter().find(|n| n.id == id)
    }

    pub fn node_by_labels(&self, labels: &LabelSet) -> Option<&NodeType> {
        self.node_types.iter().find(|n| &n.labels == labels)
    }

    pub fn node_by_name(&self, name: &str) -> Option<&NodeType> {
        self.node_by_labels(&LabelSet::from_display(name))
    }

    pub fn edge_by_id(&self, id: &str) -> Option<&EdgeType> {
        self.edge_types.iter().find(|e| e.id == id)
    }

    pub fn edge_by_key(&self, key: &EdgeKey) -> Option<&EdgeType> {
        self.edge_types.iter().find(|e| &self.key_of(e) == key)
    }

    /// Display name of the node type with the given id (`?` if unknown).
    pub fn name_of(&self, id: &str) -> String {
        self.node_by_id(id)
            .map(NodeType::display_name)
            .unwrap_or_else(|| "?".to_string())
    }

    fn labels_of(&self, id: &str) -> LabelSet {
        self.node_by_id(id)
            .map(|n| n.labels.clone())
            .unwrap_or_default()
    }

    pub fn key_of(&self, edge: &EdgeType) -> EdgeKey {
        EdgeKey::new(
            edge.labels.clone(),
            self.labels_of(&edge.src),
            self.labels_of(&edge.dst),
        )
    }

    pub fn supertype_of(&self, node: &NodeType) -> Option<&NodeType> {
        node.supertype.as_deref().and_then(|id| self.node_by_id(id))
    }

    /// An id with the given prefix not used by any element.
    pub fn fresh_id(&self, prefix: &str) -> String {
        fresh_id(
            self.node_types
                .iter()
                .map(|n| n.id.as_str())
                .chain(self.edge_types.iter().map(|e| e.id.as_str())),
            prefix,
        )
    }

    /// Id-free projection keyed by public names.
    pub fn named(&self) -> NamedSchema {
        let nodes = self
            .node_types
            .iter()
            .map(|n| {
                let def = NamedNode {
                    supertype: self.supertype_of(n).map(|s| s.labels.clone()),
                    properties: props_by_name(&n.properties),
                };
                (n.labels.clone(), def)
            })
            .collect();
        let edges = self
            .edge_types
            .iter()
            .map(|e| {
                let def = NamedEdge {
                    properties: props_by_name(&e.properties),
                    out_card: e.out_card,
                    in_card: e.in_card,
                };
                (self.key_of(e), def)
            })
            .collect();
        NamedSchema { nodes, edges }
    }
}

pub(crate) fn fresh_id<'a>(used: impl Iterator<Item = &'a str>, prefix: &str) -> String {
    let next = used
        .filter_map(|id| id.strip_prefix(prefix))
        .filter_map(|n| n.parse::<u64>().ok())
        .max()
        .map_or(1, |n| n + 1);
    format!("{prefix}{next}")
}

fn check_properties(owner: &str, props: &[PropertyDef]) -> Result<(), SchemaError> {
    let mut seen = HashSet::new();
    for p in props {
        if p.name.is_empty() {
            return Err(SchemaError::EmptyPropertyName(owner.to_string()));
        }
        if !seen.insert(p.name.as_str()) {
            return Err(SchemaError::DuplicateProperty {
                owner: owner.to_string(),
                key: p.name.clone(),
            });
        }
    }
    Ok(())
}

fn props_by_name(props: &[PropertyDef]) -> BTreeMap<String, PropertyDef> {
    props.iter().map(|p| (p.name.clone(), p.clone())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedNode {
    pub supertype: Option<LabelSet>,
    pub properties: BTreeMap<String, PropertyDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedEdge {
    pub properties: BTreeMap<String, PropertyDef>,
    pub out_card: Cardinality,
    pub in_card: Cardinality,
}

/// A schema keyed by public names instead of internal ids. Two schemas are
/// equal exactly when their named projections are equal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NamedSchema {
    pub nodes: BTreeMap<LabelSet, NamedNode>,
    pub edges: BTreeMap<EdgeKey, NamedEdge>,
}

impl NamedSchema {
    /// Rebuilds a [`SchemaGraph`], reusing ids from `ids_from` where names
    /// match and allocating fresh ones otherwise.
    pub fn to_schema(&self, ids_from: Option<&SchemaGraph>) -> Result<SchemaGraph, SchemaError> {
        let mut used: Vec<String> = Vec::new();
        let mut node_ids: BTreeMap<&LabelSet, String> = BTreeMap::new();
        if let Some(base) = ids_from {
            for labels in self.nodes.keys() {
                if let Some(n) = base.node_by_labels(labels) {
                    node_ids.insert(labels, n.id.clone());
                    used.push(n.id.clone());
                }
            }
        }
        for labels in self.nodes.keys() {
            if !node_ids.contains_key(labels) {
                let id = fresh_id(used.iter().map(String::as_str), "n");
                used.push(id.clone());
                node_ids.insert(labels, id);
            }
        }
        let lookup = |labels: &LabelSet| -> Result<String, SchemaError> {
            node_ids
                .get(labels)
                .cloned()
                .ok_or_else(|| SchemaError::DanglingSupertype {
                    node: labels.display_name(),
                    id: labels.display_name(),
                })
        };
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (labels, def) in &self.nodes {
            let supertype = match &def.supertype {
                Some(s) => Some(lookup(s).map_err(|_| SchemaError::DanglingSupertype {
                    node: labels.display_name(),
                    id: s.display_name(),
                })?),
                None => None,
            };
            nodes.push(NodeType {
                id: node_ids[labels].clone(),
                labels: labels.clone(),
                properties: def.properties.values().cloned().collect(),
                supertype,
            });
        }
        let mut edge_ids: BTreeMap<&EdgeKey, String> = BTreeMap::new();
        if let Some(base) = ids_from {
            for key in self.edges.keys() {
                if let Some(e) = base.edge_by_key(key) {
                    if !used.contains(&e.id) {
                        edge_ids.insert(key, e.id.clone());
                        used.push(e.id.clone());
                    }
                }
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (key, def) in &self.edges {
            let id = match edge_ids.get(key) {
                Some(id) => id.clone(),
                None => {
                    let id = fresh_id(used.iter().map(String::as_str), "e");
                    used.push(id.clone());
                    id
                }
            };
            let endpoint = |labels: &LabelSet| {
                lookup(labels).map_err(|_| SchemaError::DanglingEndpoint {
                    edge: key.subject(),
                    id: labels.display_name(),
                })
            };
            edges.push(EdgeType {
                id,
                labels: key.labels.clone(),
                src: endpoint(&key.src)?,
                dst: endpoint(&key.dst)?,
                properties: def.properties.values().cloned().collect(),
                out_card: def.out_card,
                in_card: def.in_card,
            });
        }
        SchemaGraph::new(nodes, edges).map(|s| canonicalize(&s))
    }
}

/// Sorts node types by display name, edge types by (label, source, target)
/// display names and properties by name. Ids are kept.
pub fn canonicalize(s: &SchemaGraph) -> SchemaGraph {
    let mut nodes = s.node_types.clone();
    for n in &mut nodes {
        n.properties.sort_by(|a, b| a.name.cmp(&b.name));
    }
    nodes.sort_by_cached_key(NodeType::display_name);
    let mut edges = s.edge_types.clone();
    for e in &mut edges {
        e.properties.sort_by(|a, b| a.name.cmp(&b.name));
    }
    edges.sort_by_cached_key(|e| s.key_of(e).sort_key());
    SchemaGraph {
        node_types: nodes,
        edge_types: edges,
    }
}

/// Structural equality ignoring internal ids and declaration order.
pub fn schema_equal(a: &SchemaGraph, b: &SchemaGraph) -> bool {
    a.named() == b.named()
}
