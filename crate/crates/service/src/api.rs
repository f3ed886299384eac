//! JSON HTTP API over an [`Engine`].
//!
//! Reads take a shared lock on the engine, mutations an exclusive one, so
//! every mutation maps to exactly one store operation and readers never see
//! a half-applied change.

use std::path::PathBuf;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use taxotrace::recommender::{Evidence, PredictorScores, RecommenderSettings};
use taxotrace::taxonomy::{Concept, MatchKind, Taxonomy};
use taxotrace::textproc::TraceUnit;
use taxotrace::tracestore::{Decision, LinkFormat, StoreError, TraceLink};

use crate::config::save_settings;
use crate::engine::Engine;

pub const DEFAULT_SEARCH_LIMIT: usize = 20;

pub struct AppState {
    engine: RwLock<Engine>,
    config_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine, config_path: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            engine: RwLock::new(engine),
            config_path,
        })
    }

    fn read(&self) -> RwLockReadGuard<'_, Engine> {
        self.engine.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Engine> {
        self.engine.write().unwrap_or_else(|p| p.into_inner())
    }
}

pub type SharedState = Arc<AppState>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            _ if e.is_not_found() => StatusCode::NOT_FOUND,
            StoreError::Conflict(_) => StatusCode::CONFLICT,
            StoreError::InvalidArgument(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Import(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), r.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/taxonomy/search", get(search))
        .route("/api/taxonomy/concepts/{id}", get(concept))
        .route("/api/units", get(units))
        .route("/api/units/{id}", get(unit))
        .route("/api/units/{id}/suggestions", get(suggestions))
        .route("/api/decisions", post(decide))
        .route("/api/links", post(create_link).get(export_links))
        .route("/api/links/{unit_id}/{concept_id}", delete(remove_link))
        .route("/api/settings", get(get_settings).put(put_settings))
        .with_state(state)
}

#[derive(Debug, Serialize)]
struct ConceptRef {
    id: String,
    code: Option<String>,
    pref_label: String,
}

impl From<&Concept> for ConceptRef {
    fn from(c: &Concept) -> Self {
        ConceptRef {
            id: c.id.clone(),
            code: c.code.clone(),
            pref_label: c.pref_label.clone(),
        }
    }
}

/// Nearest first.
fn ancestors(tax: &Taxonomy, id: &str) -> Vec<ConceptRef> {
    tax.ancestors(id)
        .map(|a| a.into_iter().map(ConceptRef::from).collect())
        .unwrap_or_default()
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SearchResult {
    #[serde(flatten)]
    concept: Concept,
    match_kind: MatchKind,
    ancestors: Vec<ConceptRef>,
}

async fn search(
    State(state): State<SharedState>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult<Json<Vec<SearchResult>>> {
    let Query(params) = params?;
    let q = params.q.unwrap_or_default();
    if q.trim().is_empty() {
        return Err(ApiError::bad_request("query parameter `q` is required"));
    }
    let limit = params.limit.unwrap_or(DEFAULT_SEARCH_LIMIT);
    let engine = state.read();
    let tax = &engine.taxonomy;
    let hits = tax
        .search_concepts(&q, limit)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(
        hits.into_iter()
            .map(|h| SearchResult {
                concept: h.concept.clone(),
                match_kind: h.kind,
                ancestors: ancestors(tax, &h.concept.id),
            })
            .collect(),
    ))
}

#[derive(Debug, Serialize)]
struct ConceptDetail {
    #[serde(flatten)]
    concept: Concept,
    ancestors: Vec<ConceptRef>,
    children: Vec<ConceptRef>,
}

async fn concept(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult<Json<ConceptDetail>> {
    let engine = state.read();
    let tax = &engine.taxonomy;
    let c = tax
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown concept `{id}`")))?;
    Ok(Json(ConceptDetail {
        concept: c.clone(),
        ancestors: ancestors(tax, &id),
        children: tax.children(&id).map(ConceptRef::from).collect(),
    }))
}

#[derive(Debug, Serialize)]
struct UnitSummary {
    unit_id: String,
    doc_id: String,
    seq: usize,
    text: String,
    link_count: usize,
}

async fn units(State(state): State<SharedState>) -> Json<Vec<UnitSummary>> {
    let engine = state.read();
    Json(
        engine
            .corpus
            .units()
            .iter()
            .map(|u| UnitSummary {
                unit_id: u.unit_id.clone(),
                doc_id: u.doc_id.clone(),
                seq: u.seq,
                text: u.text.clone(),
                link_count: engine.store.links_for_unit(&u.unit_id).count(),
            })
            .collect(),
    )
}

#[derive(Debug, Serialize)]
struct LinkView {
    #[serde(flatten)]
    link: TraceLink,
    code: Option<String>,
    pref_label: String,
    ancestors: Vec<ConceptRef>,
}

fn link_view(tax: &Taxonomy, link: &TraceLink) -> LinkView {
    let c = tax.get(&link.concept_id);
    LinkView {
        link: link.clone(),
        code: c.and_then(|c| c.code.clone()),
        pref_label: c.map(|c| c.pref_label.clone()).unwrap_or_default(),
        ancestors: ancestors(tax, &link.concept_id),
    }
}

#[derive(Debug, Serialize)]
struct UnitDetail {
    #[serde(flatten)]
    unit: TraceUnit,
    links: Vec<LinkView>,
}

fn known_unit<'a>(engine: &'a Engine, id: &str) -> ApiResult<&'a TraceUnit> {
    engine
        .corpus
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown unit `{id}`")))
}

async fn unit(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult<Json<UnitDetail>> {
    let engine = state.read();
    let u = known_unit(&engine, &id)?;
    Ok(Json(UnitDetail {
        unit: u.clone(),
        links: engine
            .store
            .links_for_unit(&id)
            .map(|l| link_view(&engine.taxonomy, l))
            .collect(),
    }))
}

#[derive(Debug, Deserialize)]
struct SuggestionParams {
    threshold: Option<f64>,
    top_k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SuggestionView {
    concept_id: String,
    code: Option<String>,
    pref_label: String,
    ancestors: Vec<ConceptRef>,
    confidence: f64,
    scores: PredictorScores,
    evidence: Vec<Evidence>,
    reject_count: u32,
    linked: bool,
}

async fn suggestions(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    params: Result<Query<SuggestionParams>, QueryRejection>,
) -> ApiResult<Json<Vec<SuggestionView>>> {
    let Query(params) = params?;
    let engine = state.read();
    let u = known_unit(&engine, &id)?;
    let base = engine.settings;
    let settings = RecommenderSettings::new(
        params.threshold.unwrap_or(base.threshold()),
        base.max_rejects(),
        params.top_k.unwrap_or(base.top_k()),
    )
    .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let tax = &engine.taxonomy;
    let out = engine
        .index
        .recommend(u, &settings, &engine.store)
        .into_iter()
        .map(|s| {
            let c = tax.get(&s.concept_id);
            SuggestionView {
                code: c.and_then(|c| c.code.clone()),
                pref_label: c.map(|c| c.pref_label.clone()).unwrap_or_default(),
                ancestors: ancestors(tax, &s.concept_id),
                reject_count: engine.store.reject_count(&id, &s.concept_id),
                linked: engine.store.link(&id, &s.concept_id).is_some(),
                concept_id: s.concept_id,
                confidence: s.confidence,
                scores: s.scores,
                evidence: s.evidence,
            }
        })
        .collect();
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
struct DecisionRequest {
    unit_id: String,
    concept_id: String,
    decision: Decision,
    #[serde(default)]
    confidence: f64,
}

#[derive(Debug, Serialize)]
struct DecisionResponse {
    unit_id: String,
    concept_id: String,
    decision: Decision,
    reject_count: u32,
    link: Option<TraceLink>,
}

async fn decide(
    State(state): State<SharedState>,
    body: Result<Json<DecisionRequest>, JsonRejection>,
) -> ApiResult<Json<DecisionResponse>> {
    let Json(req) = body?;
    let mut engine = state.write();
    engine
        .store
        .record_decision(&req.unit_id, &req.concept_id, req.decision, req.confidence)?;
    Ok(Json(DecisionResponse {
        reject_count: engine.store.reject_count(&req.unit_id, &req.concept_id),
        link: engine.store.link(&req.unit_id, &req.concept_id).cloned(),
        unit_id: req.unit_id,
        concept_id: req.concept_id,
        decision: req.decision,
    }))
}

#[derive(Debug, Deserialize)]
struct LinkRequest {
    unit_id: String,
    concept_id: String,
}

async fn create_link(
    State(state): State<SharedState>,
    body: Result<Json<LinkRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<TraceLink>)> {
    let Json(req) = body?;
    let mut engine = state.write();
    let link = engine.store.create_manual_link(&req.unit_id, &req.concept_id)?;
    Ok((StatusCode::CREATED, Json(link)))
}

async fn remove_link(
    State(state): State<SharedState>,
    Path((unit_id, concept_id)): Path<(String, String)>,
) -> ApiResult<Json<TraceLink>> {
    let mut engine = state.write();
    Ok(Json(engine.store.unlink(&unit_id, &concept_id)?))
}

#[derive(Debug, Deserialize)]
struct ExportParams {
    format: Option<String>,
}

async fn export_links(
    State(state): State<SharedState>,
    params: Result<Query<ExportParams>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(params) = params?;
    let format: LinkFormat = params
        .format
        .as_deref()
        .unwrap_or("csv")
        .parse()
        .map_err(ApiError::bad_request)?;
    let body = state.read().store.export_links(format);
    let content_type = match format {
        LinkFormat::Csv => "text/csv; charset=utf-8",
        LinkFormat::Jsonl => "application/x-ndjson",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

async fn get_settings(State(state): State<SharedState>) -> Json<RecommenderSettings> {
    Json(state.read().settings)
}

#[derive(Debug, Deserialize)]
struct SettingsRequest {
    threshold: f64,
    max_rejects: i64,
    top_k: i64,
}

async fn put_settings(
    State(state): State<SharedState>,
    body: Result<Json<SettingsRequest>, JsonRejection>,
) -> ApiResult<Json<RecommenderSettings>> {
    let Json(req) = body?;
    let max_rejects = u32::try_from(req.max_rejects)
        .map_err(|_| ApiError::unprocessable("max_rejects must be at least 1"))?;
    let top_k = usize::try_from(req.top_k).map_err(|_| ApiError::unprocessable("top_k must be at least 1"))?;
    let settings = RecommenderSettings::new(req.threshold, max_rejects, top_k)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let mut engine = state.write();
    if let Some(path) = &state.config_path {
        save_settings(path, &settings)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    }
    engine.settings = settings;
    Ok(Json(settings))
}
