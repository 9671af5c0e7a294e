//! HTTP/JSON routes over a shared [`Platform`].
//!
//! Reads take the lock shared, writes take it exclusively, so every write
//! still goes through the archive one at a time.

use std::convert::Infallible;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::body::{Body, Bytes};
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kwsp_core::argumentation::{ArgumentPosted, Stance};
use kwsp_core::contextualization::{ArticulationRequest, Transcribed};
use kwsp_core::definitions::Registration;
use kwsp_core::exploration::ProvenanceGraph;
use kwsp_core::platform::DefinitionLoad;
use kwsp_core::{
    ElementKind, Error, InformationalElement, Link, LinkType, Platform, RecordId, SearchRequest, Surrogate,
    SurrogateFilter, TaskTypeDefinition, TranscriptionJob,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Header carrying the shared access token.
pub const TOKEN_HEADER: &str = "x-kwsp-token";

pub const DEFAULT_SEARCH_LIMIT: usize = 10;
pub const DEFAULT_RELATED_LIMIT: usize = 10;

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    platform: Arc<RwLock<Platform>>,
    token: Option<Arc<str>>,
}

impl AppState {
    pub fn new(platform: Platform, token: Option<String>) -> Self {
        AppState {
            platform: Arc::new(RwLock::new(platform)),
            token: token.map(Into::into),
        }
    }

    /// The platform the routes operate on.
    pub fn platform(&self) -> Arc<RwLock<Platform>> {
        self.platform.clone()
    }

    fn read(&self) -> RwLockReadGuard<'_, Platform> {
        self.platform.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Platform> {
        self.platform.write().unwrap_or_else(|p| p.into_inner())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSession {
    pub worker: String,
    pub task_type: String,
    pub task_instance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advance {
    pub to_activity: String,
    #[serde(default)]
    pub note: Option<String>,
}

/// Body of `POST /sessions/{id}/elements`: an articulation request without
/// the session id, which comes from the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Articulation {
    pub kind: ElementKind,
    pub content: String,
    pub surrogate: Surrogate,
    #[serde(default)]
    pub supports: Vec<RecordId>,
    #[serde(default)]
    pub satisfies: Vec<RecordId>,
    #[serde(default)]
    pub ie_type_node: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
}

impl Articulation {
    pub fn into_request(self, session_id: RecordId) -> ArticulationRequest {
        ArticulationRequest {
            session_id,
            kind: self.kind,
            content: self.content,
            surrogate: self.surrogate,
            supports: self.supports,
            satisfies: self.satisfies,
            ie_type_node: self.ie_type_node,
            note: self.note,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaiseIssue {
    pub session_id: RecordId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TakePosition {
    pub issue_id: RecordId,
    pub text: String,
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argue {
    pub position_id: RecordId,
    pub stance: Stance,
    pub text: String,
    pub author: String,
    #[serde(default)]
    pub evidence: Vec<RecordId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclude {
    pub session_id: RecordId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewLink {
    pub link_type: LinkType,
    pub source: RecordId,
    pub target: RecordId,
    #[serde(default)]
    pub note: Option<String>,
}

/// Query string of `GET /search`. `q` holds the search terms separated by
/// whitespace or commas; the remaining fields are filter clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    #[serde(default)]
    pub q: String,
    pub task_type: Option<String>,
    pub task_instance: Option<String>,
    pub activity_node: Option<String>,
    pub ie_type_node: Option<String>,
    pub kind: Option<ElementKind>,
    pub limit: Option<usize>,
}

impl SearchParams {
    pub fn to_request(&self) -> SearchRequest {
        SearchRequest {
            terms: split_list(&self.q),
            filter: SurrogateFilter {
                terms: Vec::new(),
                task_type: self.task_type.clone(),
                activity_node: self.activity_node.clone(),
                ie_type_node: self.ie_type_node.clone(),
                kind: self.kind,
                task_instance: self.task_instance.clone(),
            },
            limit: self.limit.unwrap_or(DEFAULT_SEARCH_LIMIT),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct DepthParams {
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct LimitParams {
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct LinksParams {
    pub direction: Option<kwsp_core::Direction>,
    /// Comma separated link types; empty means all.
    #[serde(default)]
    pub types: String,
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn parse_link_types(raw: &str) -> ApiResult<Vec<LinkType>> {
    split_list(raw)
        .into_iter()
        .map(|t| {
            serde_json::from_value(serde_json::Value::String(t.clone()))
                .map_err(|_| ApiError::bad_request(format!("`{t}` is not a link type")))
        })
        .collect()
}

fn json<T>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(body?.0)
}

fn query<T>(params: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    Ok(params?.0)
}

fn created<T: Serialize>(value: T) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/task-types", get(list_task_types).put(put_task_type))
        .route("/task-types/{id}", get(get_task_type))
        .route("/task-types/{id}/terms/{term}", get(lookup_term))
        .route("/task-types/{id}/nodes/{node}/instances", get(instances_under))
        .route("/task-types/{id}/deviation-report", get(deviation_report))
        .route("/sessions", get(list_sessions).post(open_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/complete", post(complete))
        .route("/sessions/{id}/abandon", post(abandon))
        .route("/sessions/{id}/context", get(context))
        .route("/sessions/{id}/elements", post(articulate))
        .route("/sessions/{id}/recommendations/next", get(next_activities))
        .route("/sessions/{id}/recommendations/related", get(related_elements))
        .route("/sessions/{id}/recommendations/completeness", get(completeness))
        .route("/transcriptions", post(transcribe))
        .route("/search", get(search))
        .route("/elements/{id}", get(get_element))
        .route("/elements/{id}/provenance", get(provenance))
        .route("/elements/{id}/supports", get(supports))
        .route("/elements/{id}/links", get(links_of))
        .route("/elements/{id}/supersede", post(supersede))
        .route("/records/{id}", get(get_record))
        .route("/links", post(create_link))
        .route("/issues", post(raise_issue))
        .route("/positions", post(take_position))
        .route("/arguments", post(argue))
        .route("/positions/{id}/verify", get(verify))
        .route("/positions/{id}/conclude", post(conclude))
        .route("/export", get(export))
        .route("/import", post(import))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .merge(api)
        .fallback(|uri: Uri| async move { ApiError::not_found(uri.path()) })
        .with_state(state)
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    if let Some(expected) = &state.token {
        let offered = request.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if offered != Some(expected.as_ref()) {
            return ApiError::unauthorized().into_response();
        }
    }
    next.run(request).await
}

async fn list_task_types(State(s): State<AppState>) -> Response {
    let defs: Vec<TaskTypeDefinition> = s.read().archive().definitions().list().iter().map(|d| d.as_ref().clone()).collect();
    Json(defs).into_response()
}

async fn put_task_type(State(s): State<AppState>, body: String) -> ApiResult<Response> {
    let loaded: DefinitionLoad = s.write().load_definition(&body)?;
    Ok(match loaded.registration {
        Registration::Added => created(loaded),
        Registration::Unchanged => Json(loaded).into_response(),
    })
}

async fn get_task_type(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(s.read().definition(&id)?.as_ref().clone()).into_response())
}

async fn lookup_term(State(s): State<AppState>, Path((id, term)): Path<(String, String)>) -> ApiResult<Response> {
    let def = s.read().definition(&id)?;
    let entry = def
        .lookup_term(&term)
        .cloned()
        .ok_or_else(|| Error::UnknownNode(format!("{id}: no vocabulary term `{term}`")))?;
    Ok(Json(entry).into_response())
}

async fn instances_under(State(s): State<AppState>, Path((id, node)): Path<(String, String)>) -> ApiResult<Response> {
    Ok(Json(s.read().instances_under(&id, &node)?).into_response())
}

async fn deviation_report(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(s.read().deviation_report(&id)?).into_response())
}

async fn list_sessions(State(s): State<AppState>) -> Response {
    let p = s.read();
    let sessions: Vec<_> = p.sessions().cloned().collect();
    Json(sessions).into_response()
}

async fn open_session(State(s): State<AppState>, body: Result<Json<OpenSession>, JsonRejection>) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(created(s.write().open_session(&b.worker, &b.task_type, &b.task_instance)?))
}

async fn get_session(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().session(&id)?.clone()).into_response())
}

async fn advance(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    body: Result<Json<Advance>, JsonRejection>,
) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(Json(s.write().advance(&id, &b.to_activity, b.note.as_deref())?).into_response())
}

async fn complete(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.write().complete_session(&id)?).into_response())
}

async fn abandon(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.write().abandon_session(&id)?).into_response())
}

async fn context(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().current_context(&id)?).into_response())
}

async fn articulate(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    body: Result<Json<Articulation>, JsonRejection>,
) -> ApiResult<Response> {
    let request = json(body)?.into_request(id);
    Ok(created(s.write().articulate(request)?))
}

async fn next_activities(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().next_activities(&id)?).into_response())
}

async fn related_elements(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    params: Result<Query<LimitParams>, QueryRejection>,
) -> ApiResult<Response> {
    let limit = query(params)?.limit.unwrap_or(DEFAULT_RELATED_LIMIT);
    Ok(Json(s.read().related_elements(&id, limit)?).into_response())
}

async fn completeness(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().completeness_warnings(&id)?).into_response())
}

async fn transcribe(State(s): State<AppState>, body: Result<Json<TranscriptionJob>, JsonRejection>) -> ApiResult<Response> {
    let job = json(body)?;
    let out: Transcribed = s.write().transcribe(job)?;
    Ok(created(out))
}

async fn search(State(s): State<AppState>, params: Result<Query<SearchParams>, QueryRejection>) -> ApiResult<Response> {
    let request = query(params)?.to_request();
    Ok(Json(s.read().search(&request)?).into_response())
}

async fn get_element(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().element(&id)?.clone()).into_response())
}

async fn get_record(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    let p = s.read();
    let record = p.get(&id).ok_or_else(|| Error::UnknownRecord(id.clone()))?;
    Ok(Json(record.clone()).into_response())
}

async fn provenance(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    params: Result<Query<DepthParams>, QueryRejection>,
) -> ApiResult<Response> {
    let depth = query(params)?.max_depth;
    let graph: ProvenanceGraph = s.read().provenance_closure(&id, depth)?;
    Ok(Json(graph).into_response())
}

async fn supports(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().support_set(&id)?).into_response())
}

async fn links_of(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    params: Result<Query<LinksParams>, QueryRejection>,
) -> ApiResult<Response> {
    let params = query(params)?;
    let types = parse_link_types(&params.types)?;
    let p = s.read();
    let links: Vec<Link> = p
        .archive()
        .links_of(&id, params.direction.unwrap_or(kwsp_core::Direction::Both), &types)?
        .into_iter()
        .cloned()
        .collect();
    Ok(Json(links).into_response())
}

async fn supersede(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    body: Result<Json<InformationalElement>, JsonRejection>,
) -> ApiResult<Response> {
    let replacement = json(body)?;
    Ok(created(s.write().supersede(&id, replacement)?))
}

async fn create_link(State(s): State<AppState>, body: Result<Json<NewLink>, JsonRejection>) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(created(s.write().link(b.link_type, b.source, b.target, b.note)?))
}

async fn raise_issue(State(s): State<AppState>, body: Result<Json<RaiseIssue>, JsonRejection>) -> ApiResult<Response> {
    let b = json(body)?;
    let posted: ArgumentPosted = s.write().raise_issue(&b.session_id, &b.text)?;
    Ok(created(posted))
}

async fn take_position(State(s): State<AppState>, body: Result<Json<TakePosition>, JsonRejection>) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(created(s.write().take_position(&b.issue_id, &b.text, &b.author)?))
}

async fn argue(State(s): State<AppState>, body: Result<Json<Argue>, JsonRejection>) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(created(s.write().argue(&b.position_id, b.stance, &b.text, &b.author, &b.evidence)?))
}

async fn verify(State(s): State<AppState>, Path(id): Path<RecordId>) -> ApiResult<Response> {
    Ok(Json(s.read().verify(&id)?).into_response())
}

async fn conclude(
    State(s): State<AppState>,
    Path(id): Path<RecordId>,
    body: Result<Json<Conclude>, JsonRejection>,
) -> ApiResult<Response> {
    let b = json(body)?;
    Ok(created(s.write().conclude(&id, &b.session_id)?))
}

/// Streams the archive as JSON Lines, one chunk per record.
async fn export(State(s): State<AppState>) -> Response {
    let text = s.read().export_string();
    let chunks: Vec<Result<Bytes, Infallible>> = text
        .split_inclusive('\n')
        .map(|line| Ok(Bytes::copy_from_slice(line.as_bytes())))
        .collect();
    (
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        Body::from_stream(futures_util::stream::iter(chunks)),
    )
        .into_response()
}

async fn import(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let count = s.write().import_from(body.as_ref())?;
    Ok(created(serde_json::json!({ "imported": count })))
}
