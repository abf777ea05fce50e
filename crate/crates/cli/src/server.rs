//! HTTP service over the engine. One workspace per id; writes to a
//! workspace are serialized by its lock, reads share it.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use simplexdb_core::{
    list_tiles, Attachment, Policy, QueryRequest, SchemaError, ServiceError, SimplexId, SlotMatching, Tile,
    TileDocument, TileFilter, Workspace, WorkspaceDocument,
};
use tokio::sync::RwLock;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    tiles: RwLock<Vec<Tile>>,
    workspaces: RwLock<BTreeMap<String, Arc<RwLock<Workspace>>>>,
    seed: u64,
    library: Option<PathBuf>,
}

impl AppState {
    /// `library`, when set, receives a copy of every imported tile.
    pub fn new(tiles: Vec<Tile>, seed: u64, library: Option<PathBuf>) -> AppState {
        AppState {
            inner: Arc::new(Inner {
                tiles: RwLock::new(tiles),
                workspaces: RwLock::new(BTreeMap::new()),
                seed,
                library,
            }),
        }
    }

    async fn workspace(&self, id: &str) -> Option<Arc<RwLock<Workspace>>> {
        self.inner.workspaces.read().await.get(id).cloned()
    }

    async fn workspace_or_new(&self, id: &str) -> Arc<RwLock<Workspace>> {
        let mut all = self.inner.workspaces.write().await;
        all.entry(id.to_owned()).or_insert_with(|| Arc::new(RwLock::new(Workspace::new(self.inner.seed)))).clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/tiles", get(get_tiles).post(post_tile))
        .route("/tiles/{name}", get(get_tile))
        .route("/workspaces/{id}", get(get_workspace).put(put_workspace))
        .route("/workspaces/{id}/drop", post(post_drop))
        .route("/workspaces/{id}/glue", post(post_glue))
        .route("/workspaces/{id}/query", post(post_query))
        .route("/workspaces/{id}/table/{simplex}", get(get_table))
        .route("/workspaces/{id}/layout", get(get_layout))
        .with_state(state)
}

/// `{code, message, detail}` with an HTTP status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), detail: serde_json::Value::Null }
    }

    fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", what)
    }
}

fn list<T: ToString>(items: &[T]) -> serde_json::Value {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().into()
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        use simplexdb_core::SheafError;
        let message = e.to_string();
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        let (status, code, detail) = match &e {
            ServiceError::Document(_) => (StatusCode::BAD_REQUEST, "malformed_document", serde_json::Value::Null),
            ServiceError::Version(v) => (StatusCode::BAD_REQUEST, "version_mismatch", (*v).into()),
            ServiceError::UnknownBuiltin(b) => (unprocessable, "unknown_builtin", b.clone().into()),
            ServiceError::Provenance(_) => (unprocessable, "invalid_provenance", serde_json::Value::Null),
            ServiceError::BadTile(_) => (unprocessable, "bad_tile", serde_json::Value::Null),
            ServiceError::PolicyRequired => (
                StatusCode::CONFLICT,
                "policy_required",
                serde_json::json!(["intersect", "union_all", "union_dedup"]),
            ),
            ServiceError::UnknownTile(t) => (StatusCode::NOT_FOUND, "unknown_tile", t.clone().into()),
            ServiceError::Schema(SchemaError::LabelMismatch { slot, left, right })
            | ServiceError::Sheaf(SheafError::Schema(SchemaError::LabelMismatch { slot, left, right })) => (
                unprocessable,
                "label_mismatch",
                serde_json::json!({"slot": slot, "left": left, "right": right}),
            ),
            ServiceError::Schema(SchemaError::Invalid(vs)) => (unprocessable, "invalid_schema", list(vs)),
            ServiceError::Sheaf(SheafError::Invalid(vs)) => (unprocessable, "invalid_sheaf", list(vs)),
            ServiceError::Schema(SchemaError::UnknownSimplex(s)) => {
                (StatusCode::NOT_FOUND, "unknown_simplex", s.to_string().into())
            }
            ServiceError::Schema(_) => (unprocessable, "schema_error", serde_json::Value::Null),
            ServiceError::Sheaf(_) => (unprocessable, "sheaf_error", serde_json::Value::Null),
            ServiceError::Query(_) => (unprocessable, "query_error", serde_json::Value::Null),
            ServiceError::Layout(_) => (unprocessable, "layout_error", serde_json::Value::Null),
        };
        ApiError { status, code, message, detail }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { code: self.code.to_owned(), message: self.message, detail: self.detail };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::from(ServiceError::Document(e.to_string())))
}

async fn get_tiles(
    State(state): State<AppState>,
    Query(filter): Query<TileFilter>,
) -> ApiResult<Vec<simplexdb_core::TileSummary>> {
    Ok(Json(list_tiles(&state.inner.tiles.read().await, &filter, Utc::now())))
}

async fn get_tile(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult<TileDocument> {
    let tiles = state.inner.tiles.read().await;
    let tile = tiles.iter().find(|t| t.name() == name).ok_or(ServiceError::UnknownTile(name))?;
    Ok(Json(TileDocument::from_tile(tile)))
}

async fn post_tile(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let doc: TileDocument = parse(&body)?;
    let tile = doc.to_tile()?;
    let mut tiles = state.inner.tiles.write().await;
    if tiles.iter().any(|t| t.name() == tile.name()) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "duplicate_tile",
            format!("a tile named `{}` is already in the library", tile.name()),
        ));
    }
    if let Some(dir) = &state.inner.library {
        crate::save_tile(dir, &tile).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", e.to_string()))?;
    }
    let summary = simplexdb_core::tile::summarize(&tile, Utc::now());
    tiles.push(tile);
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn get_workspace(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<WorkspaceDocument> {
    let ws = state.workspace(&id).await.ok_or_else(|| ApiError::not_found(format!("no workspace `{id}`")))?;
    let doc = ws.read().await.to_document();
    Ok(Json(doc))
}

async fn put_workspace(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<WorkspaceDocument> {
    let doc: WorkspaceDocument = parse(&body)?;
    let loaded = Workspace::from_document(&doc)?;
    let ws = state.workspace_or_new(&id).await;
    *ws.write().await = loaded;
    Ok(Json(doc))
}

/// A tile by library name or inline document, with an optional attachment.
#[derive(Deserialize)]
pub struct DropRequest {
    #[serde(default)]
    pub tile: Option<String>,
    #[serde(default)]
    pub tile_document: Option<TileDocument>,
    #[serde(default)]
    pub attachment: Option<Attachment>,
    #[serde(default)]
    pub policy: Option<Policy>,
}

async fn post_drop(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<WorkspaceDocument> {
    let req: DropRequest = parse(&body)?;
    let tile = match (req.tile, req.tile_document) {
        (Some(name), None) => {
            let tiles = state.inner.tiles.read().await;
            tiles.iter().find(|t| t.name() == name).cloned().ok_or(ServiceError::UnknownTile(name))?
        }
        (None, Some(doc)) => doc.to_tile()?,
        _ => return Err(ServiceError::Document("give exactly one of `tile` and `tile_document`".into()).into()),
    };
    let ws = state.workspace_or_new(&id).await;
    let mut guard = ws.write().await;
    let next = guard.drop_tile(&tile, req.attachment, req.policy)?;
    for w in next.warnings() {
        tracing::warn!(workspace = %id, "{w}");
    }
    *guard = next;
    Ok(Json(guard.to_document()))
}

#[derive(Deserialize)]
pub struct GlueRequest {
    pub x1: SimplexId,
    pub x2: SimplexId,
    pub matching: Vec<usize>,
    #[serde(default)]
    pub policy: Option<Policy>,
}

async fn post_glue(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<WorkspaceDocument> {
    let req: GlueRequest = parse(&body)?;
    let ws = state.workspace(&id).await.ok_or_else(|| ApiError::not_found(format!("no workspace `{id}`")))?;
    let mut guard = ws.write().await;
    let next = guard.glue(&req.x1, &req.x2, &SlotMatching(req.matching), req.policy)?;
    *guard = next;
    Ok(Json(guard.to_document()))
}

async fn post_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<simplexdb_core::QueryResponse> {
    let req: QueryRequest = parse(&body)?;
    let ws = state.workspace(&id).await.ok_or_else(|| ApiError::not_found(format!("no workspace `{id}`")))?;
    let resp = ws.read().await.query_request(&req)?;
    Ok(Json(resp))
}

/// Sample rows shown for a virtual table.
pub const SAMPLE_ROWS: usize = 3;

async fn get_table(
    State(state): State<AppState>,
    Path((id, simplex)): Path<(String, String)>,
) -> ApiResult<simplexdb_core::TableView> {
    let ws = state.workspace(&id).await.ok_or_else(|| ApiError::not_found(format!("no workspace `{id}`")))?;
    let view = ws.read().await.table_view(&SimplexId::new(simplex), SAMPLE_ROWS, Utc::now())?;
    Ok(Json(view))
}

async fn get_layout(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<simplexdb_core::LayoutDocument> {
    let ws = state.workspace(&id).await.ok_or_else(|| ApiError::not_found(format!("no workspace `{id}`")))?;
    let doc = ws.read().await.layout_document()?;
    Ok(Json(doc))
}
