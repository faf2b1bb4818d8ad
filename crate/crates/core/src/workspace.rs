//! Versioned schema store.
//!
//! On disk a workspace is a directory holding `index.json`, one
//! `versions/<id>.pgs` file per commit and the working copy in `head.pgs`.
//! History is append-only with dense ids starting at 1.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::diff::{compute_diff, SchemaDiff};
use crate::schema::{canonicalize, LabelSet, SchemaGraph};
use crate::text::{parse_schema, schema_text};

const INDEX: &str = "index.json";
const HEAD: &str = "head.pgs";
const VERSIONS: &str = "versions";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt workspace file {}: {reason}", file.display())]
    Corrupt { file: PathBuf, reason: String },
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("unknown export format `{0}` (expected pgs or json)")]
    UnknownFormat(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct Version {
    pub id: u64,
    pub message: String,
    /// UTC seconds since the epoch.
    pub timestamp: i64,
    pub schema: SchemaGraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionMeta {
    pub id: u64,
    pub message: String,
    pub timestamp: i64,
}

impl From<&Version> for VersionMeta {
    fn from(v: &Version) -> Self {
        VersionMeta {
            id: v.id,
            message: v.message.clone(),
            timestamp: v.timestamp,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    versions: Vec<VersionMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Pgs,
    Json,
}

impl FromStr for ExportFormat {
    type Err = WorkspaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pgs" => Ok(ExportFormat::Pgs),
            "json" => Ok(ExportFormat::Json),
            other => Err(WorkspaceError::UnknownFormat(other.to_string())),
        }
    }
}

/// JSON rendering of a schema (canonical order, public names only).
pub fn schema_to_json(s: &SchemaGraph) -> Value {
    let s = canonicalize(s);
    let labels = |l: &LabelSet| l.iter().map(str::to_string).collect::<Vec<_>>();
    let node_types: Vec<Value> = s
        .node_types()
        .iter()
        .map(|n| {
            json!({
                "labels": labels(&n.labels),
                "supertype": s.supertype_of(n).map(|t| t.display_name()),
                "properties": n.properties,
            })
        })
        .collect();
    let edge_types: Vec<Value> = s
        .edge_types()
        .iter()
        .map(|e| {
            json!({
                "label": e.labels.display_name(),
                "src": s.name_of(&e.src),
                "dst": s.name_of(&e.dst),
                "outCard": e.out_card,
                "inCard": e.in_card,
                "properties": e.properties,
            })
        })
        .collect();
    json!({ "nodeTypes": node_types, "edgeTypes": edge_types })
}

pub fn render_export(s: &SchemaGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Pgs => schema_text(s),
        ExportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&schema_to_json(s)).expect("json value");
            text.push('\n');
            text
        }
    }
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
    versions: Vec<Version>,
    head: SchemaGraph,
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), WorkspaceError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_schema(path: &Path) -> Result<SchemaGraph, WorkspaceError> {
    let text = fs::read_to_string(path).map_err(|e| WorkspaceError::Corrupt {
        file: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_schema(&text).map_err(|errs| WorkspaceError::Corrupt {
        file: path.to_path_buf(),
        reason: errs.first().map(ToString::to_string).unwrap_or_default(),
    })
}

impl Workspace {
    /// Opens the workspace at `root`. A missing or empty directory yields a
    /// fresh workspace with an empty head.
    pub fn load(root: impl Into<PathBuf>) -> Result<Self, WorkspaceError> {
        let root = root.into();
        let index_path = root.join(INDEX);
        let mut versions = Vec::new();
        if index_path.exists() {
            let raw = fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
            let index: Index = serde_json::from_str(&raw).map_err(|e| WorkspaceError::Corrupt {
                file: index_path.clone(),
                reason: e.to_string(),
            })?;
            for (pos, meta) in index.versions.into_iter().enumerate() {
                if meta.id != pos as u64 + 1 {
                    return Err(WorkspaceError::Corrupt {
                        file: index_path,
                        reason: format!("version ids are not dense: found {} at position {}", meta.id, pos + 1),
                    });
                }
                let schema = read_schema(&root.join(VERSIONS).join(format!("{}.pgs", meta.id)))?;
                versions.push(Version {
                    id: meta.id,
                    message: meta.message,
                    timestamp: meta.timestamp,
                    schema,
                });
            }
        }
        let head_path = root.join(HEAD);
        let head = if head_path.exists() {
            read_schema(&head_path)?
        } else {
            versions.last().map(|v| v.schema.clone()).unwrap_or_default()
        };
        Ok(Workspace { root, versions, head })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn head(&self) -> &SchemaGraph {
        &self.head
    }

    pub fn versions(&self) -> &[Version] {
        &self.versions
    }

    pub fn version(&self, id: u64) -> Result<&Version, WorkspaceError> {
        id.checked_sub(1)
            .and_then(|i| self.versions.get(i as usize))
            .ok_or(WorkspaceError::UnknownVersion(id))
    }

    pub fn version_meta(&self) -> Vec<VersionMeta> {
        self.versions.iter().map(VersionMeta::from).collect()
    }

    fn ensure_dirs(&self) -> Result<(), WorkspaceError> {
        let dir = self.root.join(VERSIONS);
        fs::create_dir_all(&dir).map_err(io_err(&dir))
    }

    fn write_index(&self) -> Result<(), WorkspaceError> {
        let index = Index {
            versions: self.version_meta(),
        };
        let text = serde_json::to_string_pretty(&index).expect("index serializes");
        write_atomic(&self.root.join(INDEX), &text)
    }

    fn write_head(&self) -> Result<(), WorkspaceError> {
        write_atomic(&self.root.join(HEAD), &schema_text(&self.head))
    }

    /// Persists the head and the index.
    pub fn save(&self) -> Result<(), WorkspaceError> {
        self.ensure_dirs()?;
        for v in &self.versions {
            let path = self.root.join(VERSIONS).join(format!("{}.pgs", v.id));
            if !path.exists() {
                write_atomic(&path, &schema_text(&v.schema))?;
            }
        }
        self.write_index()?;
        self.write_head()
    }

    /// Replaces the working schema and persists it.
    pub fn set_head(&mut self, schema: SchemaGraph) -> Result<(), WorkspaceError> {
        self.ensure_dirs()?;
        self.head = schema;
        self.write_head()
    }

    /// Records the head as the next version. Identical consecutive versions
    /// are allowed.
    pub fn commit(&mut self, message: &str) -> Result<&Version, WorkspaceError> {
        self.ensure_dirs()?;
        let id = self.versions.len() as u64 + 1;
        let text = schema_text(&self.head);
        let path = self.root.join(VERSIONS).join(format!("{id}.pgs"));
        write_atomic(&path, &text)?;
        self.versions.push(Version {
            id,
            message: message.to_string(),
            timestamp: chrono::Utc::now().timestamp(),
            schema: self.head.clone(),
        });
        if let Err(e) = self.write_index().and_then(|_| self.write_head()) {
            self.versions.pop();
            let _ = fs::remove_file(&path);
            return Err(e);
        }
        Ok(self.versions.last().expect("just pushed"))
    }

    pub fn diff_versions(&self, from: u64, to: u64) -> Result<SchemaDiff, WorkspaceError> {
        Ok(compute_diff(&self.version(from)?.schema, &self.version(to)?.schema))
    }

    pub fn export(&self, format: ExportFormat, path: &Path) -> Result<(), WorkspaceError> {
        fs::write(path, render_export(&self.head, format)).map_err(io_err(path))
    }
}
