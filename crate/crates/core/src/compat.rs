//! Backwards-compatibility gate: a change is accepted only if data valid
//! under the old schema stays valid under the new one. In practice that
//! means additions, widenings and loosenings.

use serde::Serialize;

use crate::diff::{ChangeRecord, SchemaDiff};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatViolation {
    pub record: ChangeRecord,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatReport {
    pub compatible: bool,
    pub violations: Vec<CompatViolation>,
}

/// Why `record` breaks existing data, or `None` if it is safe.
pub fn violation_reason(record: &ChangeRecord) -> Option<String> {
    match record {
        ChangeRecord::RemovedNodeType { .. } => Some("removes a node type".into()),
        ChangeRecord::RemovedEdgeType { .. } => Some("removes an edge type".into()),
        ChangeRecord::RemovedProperty { .. } => Some("removes a property".into()),
        ChangeRecord::AddedProperty { def, .. } if def.required => {
            Some("adds a required property existing data lacks".into())
        }
        ChangeRecord::ChangedPropertyType { before, after, .. } if !before.is_subtype_of(*after) => {
            Some(format!("narrows {} to {}", before.prose(), after.prose()))
        }
        ChangeRecord::ChangedPropertyRequired {
            before: false,
            after: true,
            ..
        } => Some("makes an optional property required".into()),
        ChangeRecord::ChangedCardinality { before, after, .. }
            if !(before.0.within(&after.0) && before.1.within(&after.1)) =>
        {
            Some(format!(
                "tightens cardinality (out {} -> {}, in {} -> {})",
                before.0, after.0, before.1, after.1
            ))
        }
        ChangeRecord::ChangedEdgeEndpoints { .. } => Some("changes edge endpoints".into()),
        _ => None,
    }
}

pub fn check_compat(d: &SchemaDiff) -> CompatReport {
    let violations: Vec<CompatViolation> = d
        .iter()
        .filter_map(|r| {
            violation_reason(r).map(|reason| CompatViolation {
                record: r.clone(),
                reason,
            })
        })
        .collect();
    CompatReport {
        compatible: violations.is_empty(),
        violations,
    }
}
