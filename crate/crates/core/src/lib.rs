//! Property-graph schema tooling: extract a schema from instance data,
//! refine it, diff versions, gate backwards-incompatible changes and keep a
//! versioned history.

pub mod compat;
pub mod diff;
pub mod extract;
pub mod graph;
pub mod refine;
pub mod schema;
pub mod service;
pub mod text;
pub mod workspace;

pub use compat::{check_compat, CompatReport};
pub use diff::{annotate_visual, apply_diff, compute_diff, render_semantic, ChangeRecord, SchemaDiff};
pub use extract::{extract_schema, infer_property_type, infer_subtypes, ExtractionOptions};
pub use graph::{load_graph, validate_conformance, ConformanceOptions, ConformanceReport, PropertyGraph};
pub use refine::{apply_basic_edit, apply_edit, BasicEdit, Edit, RefineError};
pub use schema::{
    canonicalize, least_common_supertype, schema_equal, Cardinality, DataType, EdgeType, LabelSet,
    NodeType, PropertyDef, SchemaGraph,
};
pub use text::{parse_schema, serialize_schema, span_of, ParseError, SourceSpan};
pub use workspace::{Version, Workspace};
