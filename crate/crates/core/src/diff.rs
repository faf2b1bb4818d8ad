//! Differences between two schemas.
//!
//! Types are matched by display name and properties by key, so a rename
//! shows up as a removal plus an addition. The one exception is an edge
//! label that occurs exactly once on each side with different endpoints,
//! which is reported as an endpoint change.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::schema::{
    Cardinality, DataType, EdgeKey, LabelSet, NamedEdge, NamedNode, NamedSchema, PropertyDef,
    SchemaGraph,
};

/// The element owning a property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Node(LabelSet),
    Edge(EdgeKey),
}

impl Target {
    pub fn subject(&self) -> String {
        match self {
            Target::Node(l) => l.display_name(),
            Target::Edge(k) => k.subject(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChangeRecord {
    AddedNodeType { name: LabelSet, def: NamedNode },
    RemovedNodeType { name: LabelSet, def: NamedNode },
    AddedEdgeType { key: EdgeKey, def: NamedEdge },
    RemovedEdgeType { key: EdgeKey, def: NamedEdge },
    AddedProperty { owner: Target, def: PropertyDef },
    RemovedProperty { owner: Target, def: PropertyDef },
    ChangedPropertyType { owner: Target, key: String, before: DataType, after: DataType },
    ChangedPropertyRequired { owner: Target, key: String, before: bool, after: bool },
    ChangedCardinality {
        key: EdgeKey,
        before: (Cardinality, Cardinality),
        after: (Cardinality, Cardinality),
    },
    ChangedSupertype { name: LabelSet, before: Option<LabelSet>, after: Option<LabelSet> },
    ChangedEdgeEndpoints {
        before: EdgeKey,
        after: EdgeKey,
        before_def: NamedEdge,
        after_def: NamedEdge,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ChangeKind {
    AddedNodeType,
    RemovedNodeType,
    AddedEdgeType,
    RemovedEdgeType,
    AddedProperty,
    RemovedProperty,
    ChangedPropertyType,
    ChangedPropertyRequired,
    ChangedCardinality,
    ChangedSupertype,
    ChangedEdgeEndpoints,
}

impl ChangeKind {
    fn group(self) -> u8 {
        match self {
            ChangeKind::RemovedNodeType | ChangeKind::RemovedEdgeType | ChangeKind::RemovedProperty => 0,
            ChangeKind::AddedNodeType | ChangeKind::AddedEdgeType | ChangeKind::AddedProperty => 1,
            _ => 2,
        }
    }
}

impl ChangeRecord {
    pub fn kind(&self) -> ChangeKind {
        match self {
            ChangeRecord::AddedNodeType { .. } => ChangeKind::AddedNodeType,
            ChangeRecord::RemovedNodeType { .. } => ChangeKind::RemovedNodeType,
            ChangeRecord::AddedEdgeType { .. } => ChangeKind::AddedEdgeType,
            ChangeRecord::RemovedEdgeType { .. } => ChangeKind::RemovedEdgeType,
            ChangeRecord::AddedProperty { .. } => ChangeKind::AddedProperty,
            ChangeRecord::RemovedProperty { .. } => ChangeKind::RemovedProperty,
            ChangeRecord::ChangedPropertyType { .. } => ChangeKind::ChangedPropertyType,
            ChangeRecord::ChangedPropertyRequired { .. } => ChangeKind::ChangedPropertyRequired,
            ChangeRecord::ChangedCardinality { .. } => ChangeKind::ChangedCardinality,
            ChangeRecord::ChangedSupertype { .. } => ChangeKind::ChangedSupertype,
            ChangeRecord::ChangedEdgeEndpoints { .. } => ChangeKind::ChangedEdgeEndpoints,
        }
    }

    /// Display-name path of the changed element, e.g. `Person.age`.
    pub fn subject(&self) -> String {
        match self {
            ChangeRecord::AddedNodeType { name, .. }
            | ChangeRecord::RemovedNodeType { name, .. }
            | ChangeRecord::ChangedSupertype { name, .. } => name.display_name(),
            ChangeRecord::AddedEdgeType { key, .. }
            | ChangeRecord::RemovedEdgeType { key, .. }
            | ChangeRecord::ChangedCardinality { key, .. } => key.subject(),
            ChangeRecord::AddedProperty { owner, def } | ChangeRecord::RemovedProperty { owner, def } => {
                format!("{}.{}", owner.subject(), def.name)
            }
            ChangeRecord::ChangedPropertyType { owner, key, .. }
            | ChangeRecord::ChangedPropertyRequired { owner, key, .. } => {
                format!("{}.{key}", owner.subject())
            }
            ChangeRecord::ChangedEdgeEndpoints { before, .. } => before.subject(),
        }
    }

    /// The element (type) this record touches, for visual annotation.
    fn element(&self) -> String {
        match self {
            ChangeRecord::AddedProperty { owner, .. }
            | ChangeRecord::RemovedProperty { owner, .. }
            | ChangeRecord::ChangedPropertyType { owner, .. }
            | ChangeRecord::ChangedPropertyRequired { owner, .. } => owner.subject(),
            other => other.subject(),
        }
    }

    /// One English sentence describing the change.
    pub fn sentence(&self) -> String {
        let req = |r: bool| if r { "required" } else { "optional" };
        let sup = |s: &Option<LabelSet>| s.as_ref().map_or("none".to_string(), LabelSet::display_name);
        let cards = |(o, i): &(Cardinality, Cardinality)| format!("out {o}, in {i}");
        match self {
            ChangeRecord::AddedNodeType { name, .. } => format!("Added node {name}"),
            ChangeRecord::RemovedNodeType { name, .. } => format!("Removed node {name}"),
            ChangeRecord::AddedEdgeType { key, .. } => {
                format!("Added edge {} from {} to {}", key.labels, key.src, key.dst)
            }
            ChangeRecord::RemovedEdgeType { key, .. } => {
                format!("Removed edge {} from {} to {}", key.labels, key.src, key.dst)
            }
            ChangeRecord::AddedProperty { def, .. } => {
                format!("Added property {}: {}", self.subject(), def.datatype.prose())
            }
            ChangeRecord::RemovedProperty { .. } => format!("Removed property {}", self.subject()),
            ChangeRecord::ChangedPropertyType { before, after, .. } => format!(
                "Changed property type {} from {} to {}",
                self.subject(),
                before.prose(),
                after.prose()
            ),
            ChangeRecord::ChangedPropertyRequired { after, .. } => {
                format!("Changed property {} to {}", self.subject(), req(*after))
            }
            ChangeRecord::ChangedCardinality { key, before, after } => format!(
                "Changed cardinality of {} from {} to {} from {} to {}",
                key.labels,
                key.src,
                key.dst,
                cards(before),
                cards(after)
            ),
            ChangeRecord::ChangedSupertype { name, before, after } => {
                format!("Changed supertype of {name} from {} to {}", sup(before), sup(after))
            }
            ChangeRecord::ChangedEdgeEndpoints { before, after, .. } => format!(
                "Changed endpoints of {} from {} -> {} to {} -> {}",
                before.labels, before.src, before.dst, after.src, after.dst
            ),
        }
    }

    fn payloads(&self) -> (Value, Value) {
        let card_json = |(o, i): &(Cardinality, Cardinality)| json!({"out": o, "in": i});
        let sup = |s: &Option<LabelSet>| s.as_ref().map(LabelSet::display_name);
        match self {
            ChangeRecord::AddedNodeType { def, .. } => (Value::Null, node_json(def)),
            ChangeRecord::RemovedNodeType { def, .. } => (node_json(def), Value::Null),
            ChangeRecord::AddedEdgeType { key, def } => (Value::Null, edge_json(key, def)),
            ChangeRecord::RemovedEdgeType { key, def } => (edge_json(key, def), Value::Null),
            ChangeRecord::AddedProperty { def, .. } => (Value::Null, json!(def)),
            ChangeRecord::RemovedProperty { def, .. } => (json!(def), Value::Null),
            ChangeRecord::ChangedPropertyType { before, after, .. } => (json!(before), json!(after)),
            ChangeRecord::ChangedPropertyRequired { before, after, .. } => {
                (json!(before), json!(after))
            }
            ChangeRecord::ChangedCardinality { before, after, .. } => {
                (card_json(before), card_json(after))
            }
            ChangeRecord::ChangedSupertype { before, after, .. } => (json!(sup(before)), json!(sup(after))),
            ChangeRecord::ChangedEdgeEndpoints {
                before,
                after,
                before_def,
                after_def,
            } => (edge_json(before, before_def), edge_json(after, after_def)),
        }
    }

    pub fn to_json(&self) -> Value {
        let (before, after) = self.payloads();
        json!({
            "kind": self.kind(),
            "subject": self.subject(),
            "before": before,
            "after": after,
        })
    }
}

fn props_json(props: &BTreeMap<String, PropertyDef>) -> Value {
    json!(props.values().collect::<Vec<_>>())
}

fn node_json(def: &NamedNode) -> Value {
    json!({
        "supertype": def.supertype.as_ref().map(LabelSet::display_name),
        "properties": props_json(&def.properties),
    })
}

fn edge_json(key: &EdgeKey, def: &NamedEdge) -> Value {
    json!({
        "label": key.labels.display_name(),
        "src": key.src.display_name(),
        "dst": key.dst.display_name(),
        "outCard": def.out_card,
        "inCard": def.in_card,
        "properties": props_json(&def.properties),
    })
}

impl Serialize for ChangeRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Records in canonical order: removals, then additions, then changes,
/// each group sorted by subject.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SchemaDiff {
    records: Vec<ChangeRecord>,
}

impl SchemaDiff {
    pub fn new(mut records: Vec<ChangeRecord>) -> Self {
        records.sort_by_cached_key(|r| (r.kind().group(), r.subject(), r.kind()));
        SchemaDiff { records }
    }

    pub fn records(&self) -> &[ChangeRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChangeRecord> {
        self.records.iter()
    }
}

impl<'a> IntoIterator for &'a SchemaDiff {
    type Item = &'a ChangeRecord;
    type IntoIter = std::slice::Iter<'a, ChangeRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

fn diff_properties(
    owner: &Target,
    old: &BTreeMap<String, PropertyDef>,
    new: &BTreeMap<String, PropertyDef>,
    out: &mut Vec<ChangeRecord>,
) {
    for (key, p) in old {
        match new.get(key) {
            None => out.push(ChangeRecord::RemovedProperty {
                owner: owner.clone(),
                def: p.clone(),
            }),
            Some(q) => {
                if p.datatype != q.datatype {
                    out.push(ChangeRecord::ChangedPropertyType {
                        owner: owner.clone(),
                        key: key.clone(),
                        before: p.datatype,
                        after: q.datatype,
                    });
                }
                if p.required != q.required {
                    out.push(ChangeRecord::ChangedPropertyRequired {
                        owner: owner.clone(),
                        key: key.clone(),
                        before: p.required,
                        after: q.required,
                    });
                }
            }
        }
    }
    for (key, q) in new {
        if !old.contains_key(key) {
            out.push(ChangeRecord::AddedProperty {
                owner: owner.clone(),
                def: q.clone(),
            });
        }
    }
}

pub fn compute_diff(old: &SchemaGraph, new: &SchemaGraph) -> SchemaDiff {
    let (old, new) = (old.named(), new.named());
    let mut out = Vec::new();

    for (name, def) in &old.nodes {
        match new.nodes.get(name) {
            None => out.push(ChangeRecord::RemovedNodeType {
                name: name.clone(),
                def: def.clone(),
            }),
            Some(after) => {
                if def.supertype != after.supertype {
                    out.push(ChangeRecord::ChangedSupertype {
                        name: name.clone(),
                        before: def.supertype.clone(),
                        after: after.supertype.clone(),
                    });
                }
                diff_properties(&Target::Node(name.clone()), &def.properties, &after.properties, &mut out);
            }
        }
    }
    for (name, def) in &new.nodes {
        if !old.nodes.contains_key(name) {
            out.push(ChangeRecord::AddedNodeType {
                name: name.clone(),
                def: def.clone(),
            });
        }
    }

    let removed: Vec<&EdgeKey> = old.edges.keys().filter(|k| !new.edges.contains_key(*k)).collect();
    let added: Vec<&EdgeKey> = new.edges.keys().filter(|k| !old.edges.contains_key(*k)).collect();
    let count_label = |keys: &[&EdgeKey], labels: &LabelSet| keys.iter().filter(|k| &k.labels == labels).count();
    let label_total = |all: &BTreeMap<EdgeKey, NamedEdge>, labels: &LabelSet| {
        all.keys().filter(|k| &k.labels == labels).count()
    };
    let mut moved: BTreeSet<&EdgeKey> = BTreeSet::new();
    for before in &removed {
        let labels = &before.labels;
        let unique = label_total(&old.edges, labels) == 1
            && label_total(&new.edges, labels) == 1
            && count_label(&removed, labels) == 1
            && count_label(&added, labels) == 1;
        if !unique {
            continue;
        }
        let after = added.iter().find(|k| &k.labels == labels).expect("counted above");
        moved.insert(before);
        moved.insert(after);
        out.push(ChangeRecord::ChangedEdgeEndpoints {
            before: (*before).clone(),
            after: (*after).clone(),
            before_def: old.edges[*before].clone(),
            after_def: new.edges[*after].clone(),
        });
    }
    for (key, def) in &old.edges {
        if moved.contains(key) {
            continue;
        }
        match new.edges.get(key) {
            None => out.push(ChangeRecord::RemovedEdgeType {
                key: key.clone(),
                def: def.clone(),
            }),
            Some(after) => {
                let (b, a) = ((def.out_card, def.in_card), (after.out_card, after.in_card));
                if b != a {
                    out.push(ChangeRecord::ChangedCardinality {
                        key: key.clone(),
                        before: b,
                        after: a,
                    });
                }
                diff_properties(&Target::Edge(key.clone()), &def.properties, &after.properties, &mut out);
            }
        }
    }
    for (key, def) in &new.edges {
        if !old.edges.contains_key(key) && !moved.contains(key) {
            out.push(ChangeRecord::AddedEdgeType {
                key: key.clone(),
                def: def.clone(),
            });
        }
    }
    SchemaDiff::new(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot apply `{record}`: {reason}")]
pub struct ApplyError {
    pub record: String,
    pub reason: String,
}

fn conflict(r: &ChangeRecord, reason: impl Into<String>) -> ApplyError {
    ApplyError {
        record: r.sentence(),
        reason: reason.into(),
    }
}

fn props_of<'a>(
    s: &'a mut NamedSchema,
    owner: &Target,
) -> Option<&'a mut BTreeMap<String, PropertyDef>> {
    match owner {
        Target::Node(n) => s.nodes.get_mut(n).map(|n| &mut n.properties),
        Target::Edge(k) => s.edges.get_mut(k).map(|e| &mut e.properties),
    }
}

/// Patches `base` with `d`. Records are applied in dependency order (edge
/// removals before node removals, node additions before edge additions)
/// regardless of their listed order.
pub fn apply_diff(base: &SchemaGraph, d: &SchemaDiff) -> Result<SchemaGraph, ApplyError> {
    let mut s = base.named();
    let phase = |r: &ChangeRecord| -> u8 {
        match r {
            ChangeRecord::ChangedEdgeEndpoints { .. } => 0,
            ChangeRecord::RemovedEdgeType { .. } => 1,
            ChangeRecord::RemovedProperty { .. } => 2,
            ChangeRecord::RemovedNodeType { .. } => 3,
            ChangeRecord::AddedNodeType { .. } => 4,
            ChangeRecord::ChangedSupertype { .. } => 5,
            ChangeRecord::AddedEdgeType { .. } => 6,
            ChangeRecord::AddedProperty { .. }
            | ChangeRecord::ChangedPropertyType { .. }
            | ChangeRecord::ChangedPropertyRequired { .. }
            | ChangeRecord::ChangedCardinality { .. } => 7,
        }
    };
    let mut ordered: Vec<&ChangeRecord> = d.records().iter().collect();
    ordered.sort_by_key(|r| phase(r));
    let mut relocated: Vec<(EdgeKey, NamedEdge, &ChangeRecord)> = Vec::new();
    let mut removed_nodes: BTreeSet<LabelSet> = BTreeSet::new();

    for r in ordered {
        // endpoint moves re-insert their edge once additions are done
        if phase(r) == 6 && !relocated.is_empty() {
            for (key, def, rec) in relocated.drain(..) {
                insert_edge(&mut s, key, def, rec)?;
            }
        }
        match r {
            ChangeRecord::ChangedEdgeEndpoints {
                before, after, after_def, ..
            } => {
                s.edges.remove(before).ok_or_else(|| conflict(r, "edge type not found"))?;
                relocated.push((after.clone(), after_def.clone(), r));
            }
            ChangeRecord::RemovedEdgeType { key, .. } => {
                s.edges.remove(key).ok_or_else(|| conflict(r, "edge type not found"))?;
            }
            ChangeRecord::RemovedProperty { owner, def } => {
                props_of(&mut s, owner)
                    .ok_or_else(|| conflict(r, "owner not found"))?
                    .remove(&def.name)
                    .ok_or_else(|| conflict(r, "property not found"))?;
            }
            ChangeRecord::RemovedNodeType { name, .. } => {
                s.nodes.remove(name).ok_or_else(|| conflict(r, "node type not found"))?;
                removed_nodes.insert(name.clone());
                s.edges.retain(|k, _| &k.src != name && &k.dst != name);
            }
            ChangeRecord::AddedNodeType { name, def } => {
                if s.nodes.contains_key(name) {
                    return Err(conflict(r, "node type already exists"));
                }
                s.nodes.insert(name.clone(), def.clone());
            }
            ChangeRecord::ChangedSupertype { name, before, after } => {
                let node = s.nodes.get_mut(name).ok_or_else(|| conflict(r, "node type not found"))?;
                let dangling = node.supertype.as_ref().is_some_and(|sup| removed_nodes.contains(sup));
                if &node.supertype != before && !dangling {
                    return Err(conflict(r, "supertype does not match"));
                }
                node.supertype = after.clone();
            }
            ChangeRecord::AddedEdgeType { key, def } => insert_edge(&mut s, key.clone(), def.clone(), r)?,
            ChangeRecord::AddedProperty { owner, def } => {
                let props = props_of(&mut s, owner).ok_or_else(|| conflict(r, "owner not found"))?;
                if props.contains_key(&def.name) {
                    return Err(conflict(r, "property already exists"));
                }
                props.insert(def.name.clone(), def.clone());
            }
            ChangeRecord::ChangedPropertyType { owner, key, before, after } => {
                let p = props_of(&mut s, owner)
                    .and_then(|p| p.get_mut(key))
                    .ok_or_else(|| conflict(r, "property not found"))?;
                if p.datatype != *before {
                    return Err(conflict(r, "datatype does not match"));
                }
                p.datatype = *after;
            }
            ChangeRecord::ChangedPropertyRequired { owner, key, before, after } => {
                let p = props_of(&mut s, owner)
                    .and_then(|p| p.get_mut(key))
                    .ok_or_else(|| conflict(r, "property not found"))?;
                if p.required != *before {
                    return Err(conflict(r, "required flag does not match"));
                }
                p.required = *after;
            }
            ChangeRecord::ChangedCardinality { key, before, after } => {
                let e = s.edges.get_mut(key).ok_or_else(|| conflict(r, "edge type not found"))?;
                if (e.out_card, e.in_card) != *before {
                    return Err(conflict(r, "cardinality does not match"));
                }
                (e.out_card, e.in_card) = *after;
            }
        }
    }
    for (key, def, rec) in relocated {
        insert_edge(&mut s, key, def, rec)?;
    }
    // supertypes pointing at removed types are dropped, as with a node removal
    for node in s.nodes.values_mut() {
        if node.supertype.as_ref().is_some_and(|sup| removed_nodes.contains(sup)) {
            node.supertype = None;
        }
    }
    s.to_schema(Some(base)).map_err(|e| ApplyError {
        record: "(result)".into(),
        reason: e.to_string(),
    })
}

fn insert_edge(s: &mut NamedSchema, key: EdgeKey, def: NamedEdge, r: &ChangeRecord) -> Result<(), ApplyError> {
    if s.edges.contains_key(&key) {
        return Err(conflict(r, "edge type already exists"));
    }
    if !s.nodes.contains_key(&key.src) || !s.nodes.contains_key(&key.dst) {
        return Err(conflict(r, "endpoint node type not found"));
    }
    s.edges.insert(key, def);
    Ok(())
}

pub fn render_semantic(d: &SchemaDiff) -> Vec<String> {
    d.iter().map(ChangeRecord::sentence).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Added,
    Removed,
    Modified,
    Unchanged,
}

impl Status {
    /// Accessible marker shown alongside the status colour.
    pub fn symbol(self) -> &'static str {
        match self {
            Status::Added => "+",
            Status::Removed => "-",
            Status::Modified => "~",
            Status::Unchanged => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementStatus {
    pub element: String,
    pub kind: crate::text::ElementKind,
    pub status: Status,
    pub symbol: &'static str,
}

/// Type-level status for every node and edge type in `old ∪ new`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct VisualAnnotation {
    pub elements: Vec<ElementStatus>,
}

impl VisualAnnotation {
    pub fn status_of(&self, element: &str) -> Option<Status> {
        self.elements.iter().find(|e| e.element == element).map(|e| e.status)
    }
}

pub fn annotate_visual(old: &SchemaGraph, new: &SchemaGraph, d: &SchemaDiff) -> VisualAnnotation {
    use crate::text::ElementKind;
    let mut statuses: BTreeMap<(u8, String), (ElementKind, Status)> = BTreeMap::new();
    for (schema, _) in [(old, 0), (new, 1)] {
        for n in schema.node_types() {
            statuses.insert((0, n.display_name()), (ElementKind::Node, Status::Unchanged));
        }
        for e in schema.edge_types() {
            statuses.insert((1, schema.key_of(e).subject()), (ElementKind::Edge, Status::Unchanged));
        }
    }
    let mut set = |slot: u8, name: String, status: Status| {
        if let Some(entry) = statuses.get_mut(&(slot, name)) {
            // additions and removals take precedence over modifications
            if entry.1 == Status::Unchanged || status != Status::Modified {
                entry.1 = status;
            }
        }
    };
    for r in d {
        match r {
            ChangeRecord::AddedNodeType { name, .. } => set(0, name.display_name(), Status::Added),
            ChangeRecord::RemovedNodeType { name, .. } => set(0, name.display_name(), Status::Removed),
            ChangeRecord::AddedEdgeType { key, .. } => set(1, key.subject(), Status::Added),
            ChangeRecord::RemovedEdgeType { key, .. } => set(1, key.subject(), Status::Removed),
            ChangeRecord::ChangedEdgeEndpoints { before, after, .. } => {
                set(1, before.subject(), Status::Removed);
                set(1, after.subject(), Status::Added);
            }
            ChangeRecord::ChangedCardinality { key, .. } => set(1, key.subject(), Status::Modified),
            ChangeRecord::ChangedSupertype { name, .. } => set(0, name.display_name(), Status::Modified),
            other => {
                let slot = match other {
                    ChangeRecord::AddedProperty { owner, .. }
                    | ChangeRecord::RemovedProperty { owner, .. }
                    | ChangeRecord::ChangedPropertyType { owner, .. }
                    | ChangeRecord::ChangedPropertyRequired { owner, .. } => match owner {
                        Target::Node(_) => 0,
                        Target::Edge(_) => 1,
                    },
                    _ => unreachable!(),
                };
                set(slot, other.element(), Status::Modified);
            }
        }
    }
    VisualAnnotation {
        elements: statuses
            .into_iter()
            .map(|((_, element), (kind, status))| ElementStatus {
                element,
                kind,
                status,
                symbol: status.symbol(),
            })
            .collect(),
    }
}

/// Unified line diff of two canonical texts.
pub fn render_raw(old_text: &str, new_text: &str) -> String {
    similar::TextDiff::from_lines(old_text, new_text)
        .unified_diff()
        .context_radius(3)
        .header("old", "new")
        .to_string()
}
