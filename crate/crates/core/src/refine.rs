//! Schema refinement operations. Every operation is a pure function from a
//! schema to a new schema; the result always passes the schema integrity
//! check.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::schema::{
    fresh_id, least_common_supertype, Cardinality, DataType, EdgeKey, EdgeType, LabelSet,
    NodeType, PropertyDef, SchemaError, SchemaGraph,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefineError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("name `{0}` is already in use")]
    DuplicateName(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed edit command: {0}")]
    BadCommand(String),
    #[error(transparent)]
    Schema(SchemaError),
}

impl From<SchemaError> for RefineError {
    fn from(e: SchemaError) -> Self {
        match e {
            SchemaError::DuplicateNodeType(n) | SchemaError::DuplicateEdgeType(n) => {
                RefineError::DuplicateName(n)
            }
            SchemaError::DuplicateProperty { owner, key } => {
                RefineError::DuplicateName(format!("{owner}.{key}"))
            }
            SchemaError::SupertypeCycle(n) => {
                RefineError::InvalidArgument(format!("supertype cycle through `{n}`"))
            }
            other => RefineError::Schema(other),
        }
    }
}

/// Names one edge type, by internal id or by its public name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeRef {
    Id { id: String },
    Key { label: String, src: String, dst: String },
}

impl EdgeRef {
    pub fn key(label: &str, src: &str, dst: &str) -> Self {
        EdgeRef::Key {
            label: label.into(),
            src: src.into(),
            dst: dst.into(),
        }
    }

    fn describe(&self) -> String {
        match self {
            EdgeRef::Id { id } => id.clone(),
            EdgeRef::Key { label, src, dst } => format!("{src}-[{label}]->{dst}"),
        }
    }
}

/// The element that owns a property: a node type by display name, or an
/// edge type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Owner {
    Node(String),
    Edge(EdgeRef),
}

impl Owner {
    pub fn node(name: &str) -> Self {
        Owner::Node(name.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum BasicEdit {
    AddNode {
        labels: LabelSet,
    },
    RemoveNode {
        #[serde(rename = "type")]
        name: String,
    },
    AddEdge {
        label: String,
        src: String,
        dst: String,
    },
    RemoveEdge {
        label: String,
        src: String,
        dst: String,
    },
    AddProperty {
        #[serde(rename = "type")]
        owner: Owner,
        property: PropertyDef,
    },
    RemoveProperty {
        #[serde(rename = "type")]
        owner: Owner,
        key: String,
    },
    SetPropertyType {
        #[serde(rename = "type")]
        owner: Owner,
        key: String,
        datatype: DataType,
    },
    SetRequired {
        #[serde(rename = "type")]
        owner: Owner,
        key: String,
        required: bool,
    },
    FlipEdge {
        edge: EdgeRef,
    },
    SetCardinality {
        edge: EdgeRef,
        out: Cardinality,
        #[serde(rename = "in")]
        inc: Cardinality,
    },
    SetSupertype {
        #[serde(rename = "type")]
        name: String,
        supertype: Option<String>,
    },
    Rename {
        target: Owner,
        to: String,
    },
}

/// Operations that restructure several types at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum CompositeEdit {
    MergeUnion {
        a: String,
        b: String,
        into: String,
    },
    MergeIntersection {
        types: Vec<String>,
        into: String,
    },
    Split {
        #[serde(rename = "type")]
        name: String,
        discriminator: String,
        with: String,
        without: String,
    },
    Duplicate {
        target: Owner,
        to: String,
    },
    Escalate {
        #[serde(rename = "type")]
        name: String,
        key: String,
        node: String,
        edge: String,
    },
}

/// Any refinement command, as accepted over JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Edit {
    Basic(BasicEdit),
    Composite(CompositeEdit),
}

const COMPOSITE_OPS: [&str; 5] = ["merge-union", "merge-intersection", "split", "duplicate", "escalate"];

impl Edit {
    pub fn from_json(text: &str) -> Result<Edit, RefineError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| RefineError::BadCommand(e.to_string()))?;
        Edit::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Edit, RefineError> {
        let op = value
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| RefineError::BadCommand("missing string field `op`".into()))?;
        let bad = |e: serde_json::Error| RefineError::BadCommand(e.to_string());
        if COMPOSITE_OPS.contains(&op) {
            serde_json::from_value(value).map(Edit::Composite).map_err(bad)
        } else {
            serde_json::from_value(value).map(Edit::Basic).map_err(bad)
        }
    }
}

impl<'de> Deserialize<'de> for Edit {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Edit::from_value(Value::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

impl From<BasicEdit> for Edit {
    fn from(e: BasicEdit) -> Self {
        Edit::Basic(e)
    }
}

impl From<CompositeEdit> for Edit {
    fn from(e: CompositeEdit) -> Self {
        Edit::Composite(e)
    }
}

pub fn apply_edit(s: &SchemaGraph, edit: &Edit) -> Result<SchemaGraph, RefineError> {
    match edit {
        Edit::Basic(e) => apply_basic_edit(s, e),
        Edit::Composite(CompositeEdit::MergeUnion { a, b, into }) => merge_union(s, a, b, into),
        Edit::Composite(CompositeEdit::MergeIntersection { types, into }) => {
            let names: Vec<&str> = types.iter().map(String::as_str).collect();
            merge_intersection(s, &names, into)
        }
        Edit::Composite(CompositeEdit::Split {
            name,
            discriminator,
            with,
            without,
        }) => split_node_type(s, name, discriminator, with, without),
        Edit::Composite(CompositeEdit::Duplicate { target, to }) => duplicate_type(s, target, to),
        Edit::Composite(CompositeEdit::Escalate {
            name,
            key,
            node,
            edge,
        }) => escalate_property(s, name, key, node, edge),
    }
}

/// Mutable working copy; `finish` re-runs the integrity check.
struct Draft {
    nodes: Vec<NodeType>,
    edges: Vec<EdgeType>,
}

impl Draft {
    fn of(s: &SchemaGraph) -> Self {
        let (nodes, edges) = s.clone().into_parts();
        Draft { nodes, edges }
    }

    fn finish(self) -> Result<SchemaGraph, RefineError> {
        Ok(SchemaGraph::new(self.nodes, self.edges)?)
    }

    fn fresh(&self, prefix: &str) -> String {
        fresh_id(
            self.nodes
                .iter()
                .map(|n| n.id.as_str())
                .chain(self.edges.iter().map(|e| e.id.as_str())),
            prefix,
        )
    }

    fn node_idx(&self, name: &str) -> Result<usize, RefineError> {
        let labels = LabelSet::from_display(name);
        self.nodes
            .iter()
            .position(|n| n.labels == labels)
            .ok_or_else(|| RefineError::UnknownElement(name.to_string()))
    }

    fn node_id(&self, name: &str) -> Result<String, RefineError> {
        Ok(self.nodes[self.node_idx(name)?].id.clone())
    }

    fn labels_of(&self, id: &str) -> LabelSet {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .map(|n| n.labels.clone())
            .unwrap_or_default()
    }

    fn key_of(&self, e: &EdgeType) -> EdgeKey {
        EdgeKey::new(e.labels.clone(), self.labels_of(&e.src), self.labels_of(&e.dst))
    }

    fn edge_idx(&self, r: &EdgeRef) -> Result<usize, RefineError> {
        let found = match r {
            EdgeRef::Id { id } => self.edges.iter().position(|e| &e.id == id),
            EdgeRef::Key { label, src, dst } => {
                let key = EdgeKey::new(
                    LabelSet::from_display(label),
                    LabelSet::from_display(src),
                    LabelSet::from_display(dst),
                );
                self.edges.iter().position(|e| self.key_of(e) == key)
            }
        };
        found.ok_or_else(|| RefineError::UnknownElement(r.describe()))
    }

    fn ensure_unused(&self, labels: &LabelSet, except: &[&str]) -> Result<(), RefineError> {
        match self.nodes.iter().find(|n| &n.labels == labels) {
            Some(n) if !except.contains(&n.id.as_str()) => {
                Err(RefineError::DuplicateName(labels.display_name()))
            }
            _ => Ok(()),
        }
    }

    fn props_mut(&mut self, owner: &Owner) -> Result<(&mut Vec<PropertyDef>, String), RefineError> {
        match owner {
            Owner::Node(name) => {
                let i = self.node_idx(name)?;
                Ok((&mut self.nodes[i].properties, name.clone()))
            }
            Owner::Edge(r) => {
                let i = self.edge_idx(r)?;
                let subject = self.key_of(&self.edges[i]).subject();
                Ok((&mut self.edges[i].properties, subject))
            }
        }
    }

    fn prop_mut(&mut self, owner: &Owner, key: &str) -> Result<&mut PropertyDef, RefineError> {
        let (props, name) = self.props_mut(owner)?;
        props
            .iter_mut()
            .find(|p| p.name == key)
            .ok_or_else(|| RefineError::UnknownElement(format!("{name}.{key}")))
    }

    fn remove_node(&mut self, idx: usize) -> NodeType {
        let node = self.nodes.remove(idx);
        self.edges.retain(|e| e.src != node.id && e.dst != node.id);
        for n in &mut self.nodes {
            if n.supertype.as_deref() == Some(node.id.as_str()) {
                n.supertype = None;
            }
        }
        node
    }
}

pub fn apply_basic_edit(s: &SchemaGraph, edit: &BasicEdit) -> Result<SchemaGraph, RefineError> {
    let mut d = Draft::of(s);
    match edit {
        BasicEdit::AddNode { labels } => {
            d.ensure_unused(labels, &[])?;
            let id = d.fresh("n");
            d.nodes.push(NodeType::new(id, labels.clone()));
        }
        BasicEdit::RemoveNode { name } => {
            let i = d.node_idx(name)?;
            d.remove_node(i);
        }
        BasicEdit::AddEdge { label, src, dst } => {
            let (src, dst) = (d.node_id(src)?, d.node_id(dst)?);
            let id = d.fresh("e");
            d.edges.push(EdgeType::new(id, LabelSet::from_display(label), src, dst));
        }
        BasicEdit::RemoveEdge { label, src, dst } => {
            let i = d.edge_idx(&EdgeRef::key(label, src, dst))?;
            d.edges.remove(i);
        }
        BasicEdit::AddProperty { owner, property } => {
            if property.name.is_empty() {
                return Err(RefineError::InvalidArgument("property name is empty".into()));
            }
            let (props, name) = d.props_mut(owner)?;
            if props.iter().any(|p| p.name == property.name) {
                return Err(RefineError::DuplicateName(format!("{name}.{}", property.name)));
            }
            props.push(property.clone());
        }
        BasicEdit::RemoveProperty { owner, key } => {
            let (props, name) = d.props_mut(owner)?;
            let i = props
                .iter()
                .position(|p| &p.name == key)
                .ok_or_else(|| RefineError::UnknownElement(format!("{name}.{key}")))?;
            props.remove(i);
        }
        BasicEdit::SetPropertyType { owner, key, datatype } => {
            d.prop_mut(owner, key)?.datatype = *datatype;
        }
        BasicEdit::SetRequired { owner, key, required } => {
            d.prop_mut(owner, key)?.required = *required;
        }
        BasicEdit::FlipEdge { edge } => {
            let i = d.edge_idx(edge)?;
            let e = &mut d.edges[i];
            std::mem::swap(&mut e.src, &mut e.dst);
            std::mem::swap(&mut e.out_card, &mut e.in_card);
        }
        BasicEdit::SetCardinality { edge, out, inc } => {
            out.check()?;
            inc.check()?;
            let i = d.edge_idx(edge)?;
            d.edges[i].out_card = *out;
            d.edges[i].in_card = *inc;
        }
        BasicEdit::SetSupertype { name, supertype } => {
            let i = d.node_idx(name)?;
            let sup = supertype.as_deref().map(|s| d.node_id(s)).transpose()?;
            d.nodes[i].supertype = sup;
        }
        BasicEdit::Rename { target, to } => match target {
            Owner::Node(name) => {
                let i = d.node_idx(name)?;
                let labels = LabelSet::from_display(to);
                let id = d.nodes[i].id.clone();
                d.ensure_unused(&labels, &[&id])?;
                d.nodes[i].labels = labels;
            }
            Owner::Edge(r) => {
                let i = d.edge_idx(r)?;
                d.edges[i].labels = LabelSet::from_display(to);
            }
        },
    }
    d.finish()
}

/// Union of two property sets: shared keys join their datatypes and stay
/// required only if required on both sides; one-sided keys become optional.
fn union_properties(a: &[PropertyDef], b: &[PropertyDef]) -> Vec<PropertyDef> {
    let mut out: Vec<PropertyDef> = Vec::with_capacity(a.len() + b.len());
    for p in a {
        match b.iter().find(|q| q.name == p.name) {
            Some(q) => out.push(PropertyDef::new(
                &p.name,
                least_common_supertype(p.datatype, q.datatype),
                p.required && q.required,
            )),
            None => out.push(PropertyDef::optional(&p.name, p.datatype)),
        }
    }
    for q in b {
        if !a.iter().any(|p| p.name == q.name) {
            out.push(PropertyDef::optional(&q.name, q.datatype));
        }
    }
    out
}

/// Replaces node types `a` and `b` with one type carrying the union of
/// their properties. Incident edge types are re-pointed; edge types that
/// then coincide are merged with the same rule and widened cardinalities.
pub fn merge_union(s: &SchemaGraph, a: &str, b: &str, into: &str) -> Result<SchemaGraph, RefineError> {
    let mut d = Draft::of(s);
    let (ia, ib) = (d.node_idx(a)?, d.node_idx(b)?);
    if ia == ib {
        return Err(RefineError::InvalidArgument(format!("cannot merge `{a}` with itself")));
    }
    let labels = LabelSet::from_display(into);
    let (id_a, id_b) = (d.nodes[ia].id.clone(), d.nodes[ib].id.clone());
    d.ensure_unused(&labels, &[&id_a, &id_b])?;

    let (na, nb) = (&d.nodes[ia], &d.nodes[ib]);
    let supertype = match (&na.supertype, &nb.supertype) {
        (Some(x), Some(y)) if x == y && x != &id_a && x != &id_b => Some(x.clone()),
        _ => None,
    };
    let merged = NodeType {
        id: id_a.clone(),
        labels,
        properties: union_properties(&na.properties, &nb.properties),
        supertype,
    };
    d.nodes[ia] = merged;
    d.nodes.remove(ib);
    for n in &mut d.nodes {
        if n.supertype.as_deref() == Some(id_b.as_str()) {
            n.supertype = Some(id_a.clone());
        }
        if n.supertype.as_deref() == Some(n.id.as_str()) {
            n.supertype = None;
        }
    }

    let mut edges: Vec<EdgeType> = Vec::with_capacity(d.edges.len());
    for mut e in std::mem::take(&mut d.edges) {
        for end in [&mut e.src, &mut e.dst] {
            if *end == id_b {
                *end = id_a.clone();
            }
        }
        match edges
            .iter_mut()
            .find(|x| x.labels == e.labels && x.src == e.src && x.dst == e.dst)
        {
            Some(x) => {
                x.properties = union_properties(&x.properties, &e.properties);
                x.out_card = x.out_card.widen(&e.out_card);
                x.in_card = x.in_card.widen(&e.in_card);
            }
            None => edges.push(e),
        }
    }
    d.edges = edges;
    d.finish()
}

/// Adds a new node type holding only the properties every input declares,
/// and makes it the supertype of each input that has none.
pub fn merge_intersection(
    s: &SchemaGraph,
    types: &[&str],
    into: &str,
) -> Result<SchemaGraph, RefineError> {
    if types.len() < 2 {
        return Err(RefineError::InvalidArgument(
            "intersection needs at least two types".into(),
        ));
    }
    let mut d = Draft::of(s);
    let mut idx = Vec::with_capacity(types.len());
    for t in types {
        let i = d.node_idx(t)?;
        if idx.contains(&i) {
            return Err(RefineError::InvalidArgument(format!("type `{t}` listed twice")));
        }
        idx.push(i);
    }
    let labels = LabelSet::from_display(into);
    d.ensure_unused(&labels, &[])?;

    let first = &d.nodes[idx[0]];
    let mut props = Vec::new();
    for p in &first.properties {
        let mut joined = p.clone();
        let mut everywhere = true;
        for &i in &idx[1..] {
            match d.nodes[i].property(&p.name) {
                Some(q) => {
                    joined.datatype = least_common_supertype(joined.datatype, q.datatype);
                    joined.required &= q.required;
                }
                None => {
                    everywhere = false;
                    break;
                }
            }
        }
        if everywhere {
            props.push(joined);
        }
    }
    let id = d.fresh("n");
    for &i in &idx {
        if d.nodes[i].supertype.is_none() {
            d.nodes[i].supertype = Some(id.clone());
        }
    }
    d.nodes.push(NodeType::new(id, labels).with_properties(props));
    d.finish()
}

/// Splits `name` on an optional property: `with` requires it, `without`
/// drops it. Edge types touching `name` are duplicated for each half.
pub fn split_node_type(
    s: &SchemaGraph,
    name: &str,
    discriminator: &str,
    with: &str,
    without: &str,
) -> Result<SchemaGraph, RefineError> {
    let mut d = Draft::of(s);
    let i = d.node_idx(name)?;
    let original = d.nodes[i].clone();
    let disc = original
        .property(discriminator)
        .ok_or_else(|| RefineError::UnknownElement(format!("{name}.{discriminator}")))?;
    if disc.required {
        return Err(RefineError::InvalidArgument(format!(
            "`{name}.{discriminator}` is required; there is nothing to split on"
        )));
    }
    let (with_labels, without_labels) = (LabelSet::from_display(with), LabelSet::from_display(without));
    if with_labels == without_labels {
        return Err(RefineError::DuplicateName(with_labels.display_name()));
    }
    d.ensure_unused(&with_labels, &[&original.id])?;
    d.ensure_unused(&without_labels, &[&original.id])?;

    let with_id = original.id.clone();
    let without_id = d.fresh("n");
    let mut with_node = original.clone();
    with_node.labels = with_labels;
    for p in &mut with_node.properties {
        if p.name == discriminator {
            p.required = true;
        }
    }
    let mut without_node = original.clone();
    without_node.id = without_id.clone();
    without_node.labels = without_labels;
    without_node.properties.retain(|p| p.name != discriminator);

    for n in &mut d.nodes {
        if n.supertype.as_deref() == Some(with_id.as_str()) {
            n.supertype = Some(without_id.clone());
        }
    }
    d.nodes[i] = with_node;
    d.nodes.insert(i + 1, without_node);

    let halves = |end: &str| -> Vec<String> {
        if end == with_id {
            vec![with_id.clone(), without_id.clone()]
        } else {
            vec![end.to_string()]
        }
    };
    let mut edges = Vec::with_capacity(d.edges.len());
    let mut used: HashSet<String> = d.nodes.iter().map(|n| n.id.clone()).collect();
    used.extend(d.edges.iter().map(|e| e.id.clone()));
    for e in std::mem::take(&mut d.edges) {
        let mut first = true;
        for src in halves(&e.src) {
            for dst in halves(&e.dst) {
                let mut copy = e.clone();
                copy.src = src.clone();
                copy.dst = dst;
                if !first {
                    copy.id = fresh_id(used.iter().map(String::as_str), "e");
                    used.insert(copy.id.clone());
                }
                first = false;
                edges.push(copy);
            }
        }
    }
    d.edges = edges;
    d.finish()
}

/// Copies a node type (without its edges) or an edge type (same endpoints,
/// new label).
pub fn duplicate_type(s: &SchemaGraph, target: &Owner, to: &str) -> Result<SchemaGraph, RefineError> {
    let mut d = Draft::of(s);
    match target {
        Owner::Node(name) => {
            let i = d.node_idx(name)?;
            let labels = LabelSet::from_display(to);
            d.ensure_unused(&labels, &[])?;
            let mut copy = d.nodes[i].clone();
            copy.id = d.fresh("n");
            copy.labels = labels;
            d.nodes.push(copy);
        }
        Owner::Edge(r) => {
            let i = d.edge_idx(r)?;
            let mut copy = d.edges[i].clone();
            copy.id = d.fresh("e");
            copy.labels = LabelSet::from_display(to);
            d.edges.push(copy);
        }
    }
    d.finish()
}

/// Moves property `key` of `name` onto a new node type (as its `value`
/// property) reached through a new edge type.
pub fn escalate_property(
    s: &SchemaGraph,
    name: &str,
    key: &str,
    node: &str,
    edge: &str,
) -> Result<SchemaGraph, RefineError> {
    let mut d = Draft::of(s);
    let i = d.node_idx(name)?;
    let pos = d.nodes[i]
        .properties
        .iter()
        .position(|p| p.name == key)
        .ok_or_else(|| RefineError::UnknownElement(format!("{name}.{key}")))?;
    let labels = LabelSet::from_display(node);
    d.ensure_unused(&labels, &[])?;
    let prop = d.nodes[i].properties.remove(pos);
    let owner_id = d.nodes[i].id.clone();
    let node_id = d.fresh("n");
    d.nodes.push(
        NodeType::new(node_id.clone(), labels)
            .with_properties(vec![PropertyDef::required("value", prop.datatype)]),
    );
    let out_card = Cardinality {
        min: u64::from(prop.required),
        max: Some(1),
    };
    let edge_id = d.fresh("e");
    d.edges.push(
        EdgeType::new(edge_id, LabelSet::from_display(edge), owner_id, node_id)
            .with_cardinality(out_card, Cardinality::ANY),
    );
    d.finish()
}
