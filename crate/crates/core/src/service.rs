//! HTTP front end over a single workspace.
//!
//! Every mutation takes the session lock, so requests against one workspace
//! are applied one at a time. Handlers call the same library functions as
//! the CLI and add no behavior of their own.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Multipart, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::compat::check_compat;
use crate::diff::{annotate_visual, compute_diff, render_raw, render_semantic};
use crate::extract::{extract_schema, ExtractionOptions};
use crate::graph::{load_graph, validate_conformance, ConformanceOptions, ConformanceReport, GraphError};
use crate::refine::Edit;
use crate::schema::SchemaGraph;
use crate::text::{parse_schema, schema_text, serialize_schema};
use crate::workspace::{render_export, ExportFormat, Workspace, WorkspaceError};

pub struct SessionState {
    pub workspace: Workspace,
    /// Reject edits that `check_compat` flags.
    pub guard_compat: bool,
    pub last_report: Option<ConformanceReport>,
}

impl SessionState {
    pub fn new(workspace: Workspace) -> Self {
        SessionState {
            workspace,
            guard_compat: false,
            last_report: None,
        }
    }
}

pub type Shared = Arc<Mutex<SessionState>>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.to_string() }),
        }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let status = match e {
            WorkspaceError::UnknownVersion(_) => StatusCode::NOT_FOUND,
            WorkspaceError::UnknownFormat(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e)
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let problems: Vec<Value> = e
            .problems
            .iter()
            .map(|p| json!({ "line": p.line, "message": p.message }))
            .collect();
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": "invalid graph", "problems": problems }),
        }
    }
}

type ApiResult<T = Json<Value>> = Result<T, ApiError>;

/// Id-carrying model of a schema, the counterpart of the text spans.
pub fn schema_model(s: &SchemaGraph) -> Value {
    let nodes: Vec<Value> = s
        .node_types()
        .iter()
        .map(|n| {
            json!({
                "id": n.id,
                "name": n.display_name(),
                "labels": n.labels,
                "supertype": n.supertype,
                "properties": n.properties,
            })
        })
        .collect();
    let edges: Vec<Value> = s
        .edge_types()
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "name": s.key_of(e).subject(),
                "label": e.labels.display_name(),
                "src": e.src,
                "dst": e.dst,
                "outCard": e.out_card,
                "inCard": e.in_card,
                "properties": e.properties,
            })
        })
        .collect();
    json!({ "nodes": nodes, "edges": edges })
}

/// `{text, spans, model}` for a schema.
pub fn schema_view(s: &SchemaGraph) -> Value {
    let (text, spans) = serialize_schema(s);
    // the model is built from the same canonical order the text uses
    let canon = crate::schema::canonicalize(s);
    json!({ "text": text, "spans": spans, "model": schema_model(&canon) })
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/extract", post(extract))
        .route("/validate", post(validate).get(last_report))
        .route("/schema", get(get_schema).put(put_schema))
        .route("/edits", post(edits))
        .route("/commit", post(commit))
        .route("/versions", get(versions))
        .route("/diff", get(diff))
        .route("/export", post(export))
        .route("/settings", get(get_settings).put(put_settings))
        .with_state(state)
}

pub async fn serve(root: impl Into<PathBuf>, port: u16) -> std::io::Result<()> {
    let workspace = Workspace::load(root).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let state = Arc::new(Mutex::new(SessionState::new(workspace)));
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], port))).await?;
    axum::serve(listener, router(state)).await
}

/// The uploaded graph: the first multipart field, or the raw body.
async fn graph_upload(req: Request) -> ApiResult<Bytes> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if is_multipart {
        let mut form = Multipart::from_request(req, &())
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        let field = form
            .next_field()
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?
            .ok_or_else(|| ApiError::bad_request("multipart body has no graph file"))?;
        field.bytes().await.map_err(|e| ApiError::bad_request(e.body_text()))
    } else {
        Bytes::from_request(req, &())
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ExtractQuery {
    no_cardinality: bool,
    subtypes: bool,
}

async fn extract(State(state): State<Shared>, Query(q): Query<ExtractQuery>, req: Request) -> ApiResult {
    let body = graph_upload(req).await?;
    let graph = load_graph(body.as_ref())?;
    let opts = ExtractionOptions {
        infer_cardinality: !q.no_cardinality,
        infer_subtypes: q.subtypes,
        ..ExtractionOptions::default()
    };
    let schema = extract_schema(&graph, opts);
    let mut st = state.lock().await;
    st.workspace.set_head(schema)?;
    Ok(Json(schema_view(st.workspace.head())))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ValidateQuery {
    open_world: bool,
}

async fn validate(State(state): State<Shared>, Query(q): Query<ValidateQuery>, req: Request) -> ApiResult {
    let body = graph_upload(req).await?;
    let graph = load_graph(body.as_ref())?;
    let mut st = state.lock().await;
    let report = validate_conformance(&graph, st.workspace.head(), ConformanceOptions { open_world: q.open_world });
    let out = json!(report);
    st.last_report = Some(report);
    Ok(Json(out))
}

async fn last_report(State(state): State<Shared>) -> ApiResult {
    Ok(Json(json!(state.lock().await.last_report)))
}

async fn get_schema(State(state): State<Shared>) -> ApiResult {
    Ok(Json(schema_view(state.lock().await.workspace.head())))
}

async fn put_schema(State(state): State<Shared>, text: String) -> ApiResult {
    let schema = parse_schema(&text).map_err(|errors| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        body: json!({ "error": "parse error", "errors": errors }),
    })?;
    let mut st = state.lock().await;
    st.workspace.set_head(schema)?;
    Ok(Json(schema_view(st.workspace.head())))
}

async fn edits(State(state): State<Shared>, Json(command): Json<Value>) -> ApiResult {
    let edit = Edit::from_value(command).map_err(ApiError::bad_request)?;
    let mut st = state.lock().await;
    let head = st.workspace.head();
    let next = crate::refine::apply_edit(head, &edit).map_err(ApiError::bad_request)?;
    let report = check_compat(&compute_diff(head, &next));
    if st.guard_compat && !report.compatible {
        return Err(ApiError {
            status: StatusCode::CONFLICT,
            body: json!(report),
        });
    }
    st.workspace.set_head(next)?;
    let mut view = schema_view(st.workspace.head());
    view["compat"] = json!(report);
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
struct CommitBody {
    #[serde(default)]
    message: String,
}

async fn commit(State(state): State<Shared>, Json(body): Json<CommitBody>) -> ApiResult {
    let mut st = state.lock().await;
    let v = st.workspace.commit(&body.message)?;
    Ok(Json(json!({ "id": v.id, "message": v.message, "timestamp": v.timestamp })))
}

async fn versions(State(state): State<Shared>) -> ApiResult {
    Ok(Json(json!(state.lock().await.workspace.version_meta())))
}

#[derive(Debug, Deserialize)]
struct DiffQuery {
    from: String,
    to: String,
    #[serde(default = "semantic")]
    mode: String,
}

fn semantic() -> String {
    "semantic".to_string()
}

fn pick(w: &Workspace, which: &str) -> ApiResult<SchemaGraph> {
    if which == "head" {
        return Ok(w.head().clone());
    }
    let id: u64 = which
        .parse()
        .map_err(|_| ApiError::bad_request(format!("bad version `{which}`")))?;
    Ok(w.version(id)?.schema.clone())
}

async fn diff(State(state): State<Shared>, Query(q): Query<DiffQuery>) -> ApiResult {
    let (old, new) = {
        let st = state.lock().await;
        (pick(&st.workspace, &q.from)?, pick(&st.workspace, &q.to)?)
    };
    let d = compute_diff(&old, &new);
    let out = match q.mode.as_str() {
        "semantic" => json!(render_semantic(&d)),
        "visual" => json!(annotate_visual(&old, &new, &d)),
        "raw" => json!({ "text": render_raw(&schema_text(&old), &schema_text(&new)) }),
        "json" => json!(d),
        other => return Err(ApiError::bad_request(format!("unknown diff mode `{other}`"))),
    };
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
struct ExportBody {
    format: String,
    path: Option<String>,
}

/// Export paths are resolved inside the workspace root.
fn export_path(root: &Path, rel: &str) -> ApiResult<PathBuf> {
    let rel = Path::new(rel);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Err(ApiError::bad_request("export path must be relative to the workspace"));
    }
    Ok(root.join(rel))
}

async fn export(State(state): State<Shared>, Json(body): Json<ExportBody>) -> ApiResult {
    let format: ExportFormat = body.format.parse()?;
    let st = state.lock().await;
    let content = render_export(st.workspace.head(), format);
    let written = match &body.path {
        Some(rel) => {
            let path = export_path(st.workspace.root(), rel)?;
            st.workspace.export(format, &path)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    Ok(Json(json!({ "format": body.format, "content": content, "path": written })))
}

#[derive(Debug, Deserialize)]
struct Settings {
    guard_compat: bool,
}

async fn get_settings(State(state): State<Shared>) -> ApiResult {
    Ok(Json(json!({ "guard_compat": state.lock().await.guard_compat })))
}

async fn put_settings(State(state): State<Shared>, Json(s): Json<Settings>) -> ApiResult {
    let mut st = state.lock().await;
    st.guard_compat = s.guard_compat;
    Ok(Json(json!({ "guard_compat": st.guard_compat })))
}
