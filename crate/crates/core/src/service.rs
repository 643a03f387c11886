//! HTTP API over an [`Engine`]. Bodies are JSON; errors are
//! `{"error": code, "message": text}`.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::ServiceConfig;
use crate::engine::{AssertionRequest, DecisionRequest, Engine, EngineError, ErrorKind};
use crate::session::NewSession;

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

/// Error response.
#[derive(Debug)]
pub struct ApiError(pub EngineError);

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError(EngineError::invalid("invalid_body", r.body_text()))
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError(EngineError::invalid("invalid_query", r.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.kind {
            ErrorKind::Invalid => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(code = self.0.code, "{}", self.0.message);
        }
        let body = ErrorBody { error: self.0.code, message: &self.0.message };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs a blocking engine call off the async workers.
async fn run<T: Send + 'static>(
    engine: &Arc<Engine>,
    f: impl FnOnce(&Engine) -> Result<T, EngineError> + Send + 'static,
) -> ApiResult<T> {
    let engine = Arc::clone(engine);
    tokio::task::spawn_blocking(move || f(&engine))
        .await
        .map_err(|e| ApiError(EngineError::new(ErrorKind::Internal, "internal", e.to_string())))?
        .map_err(ApiError)
}

#[derive(Debug, Deserialize)]
struct CategoryQuery {
    #[serde(default)]
    q: String,
    k: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    page: Option<usize>,
    page_size: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct AnalyticsQuery {
    group_by: Option<String>,
}

async fn categories(
    State(engine): State<Arc<Engine>>,
    query: Result<Query<CategoryQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(query) = query?;
    Ok(Json(engine.search_categories(&query.q, query.k)).into_response())
}

async fn create_session(
    State(engine): State<Arc<Engine>>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(request) = body?;
    let overview = run(&engine, move |e| e.create_session(request)).await?;
    Ok((StatusCode::CREATED, Json(overview)).into_response())
}

async fn assessment(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Response> {
    let overview = run(&engine, move |e| e.assessment(&id)).await?;
    Ok(Json(overview).into_response())
}

async fn decide(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Json<DecisionRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(request) = body?;
    let response = run(&engine, move |e| e.decide(&id, request)).await?;
    Ok(Json(response).into_response())
}

async fn results(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let page = run(&engine, move |e| e.results(&id, q.page, q.page_size)).await?;
    Ok(Json(page).into_response())
}

async fn analytics(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    query: Result<Query<AnalyticsQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let group_by = q.group_by.unwrap_or_else(|| "year".into());
    let out = run(&engine, move |e| e.analytics(&id, &group_by)).await?;
    Ok(Json(out).into_response())
}

async fn assert_relevance(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Json<AssertionRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(request) = body?;
    let record = run(&engine, move |e| e.assert_relevance(&id, &request)).await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn export(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Response> {
    let disposition = format!("attachment; filename=\"session-{id}.json\"");
    let bytes = run(&engine, move |e| e.export(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json".to_owned()), (header::CONTENT_DISPOSITION, disposition)], bytes)
        .into_response())
}

async fn not_found() -> ApiError {
    ApiError(EngineError::new(ErrorKind::NotFound, "not_found", "no such route"))
}

fn cors(origins: &[String]) -> CorsLayer {
    let origins: Vec<HeaderValue> = origins
        .iter()
        .filter_map(|o| match HeaderValue::from_str(o) {
            Ok(v) => Some(v),
            Err(_) => {
                tracing::warn!("ignoring invalid CORS origin {o:?}");
                None
            }
        })
        .collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([header::CONTENT_DISPOSITION])
}

pub fn router(engine: Arc<Engine>, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/categories", get(categories))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/assessment", get(assessment))
        .route("/sessions/{id}/decisions", post(decide))
        .route("/sessions/{id}/results", get(results))
        .route("/sessions/{id}/analytics", get(analytics))
        .route("/sessions/{id}/assertions", post(assert_relevance))
        .route("/sessions/{id}/export", get(export))
        .fallback(not_found)
        .layer(cors(cors_origins))
        .with_state(engine)
}

/// Loads everything named in `config` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let engine = tokio::task::spawn_blocking({
        let config = config.clone();
        move || Engine::from_config(&config)
    })
    .await??;
    let app = router(Arc::new(engine), &config.cors_origins);
    let listener = tokio::net::TcpListener::bind((config.bind.as_str(), config.port)).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
