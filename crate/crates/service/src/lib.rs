//! HTTP service for link assessment, route planning and sequential sessions.
//!
//! Sessions live in a [`SessionStore`] directory; Stage I draws are cached in
//! memory per dataset and sampler settings.

pub mod api;
pub mod cache;
pub mod error;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use routerisk_core::decision::recommend;
use routerisk_core::fixtures::table1;
use routerisk_core::fusion::{assess_link, StageSettings};
use routerisk_core::induced::{induce_curve, InducedCurveConfig, InducedLikelihoodCurve};
use routerisk_core::ingest::{parse_regional_csv, LinkRecord};
use routerisk_core::logit::SamplerConfig;
use routerisk_core::pipeline::{prepare_dataset, sample_stage1, PipelineError};
use routerisk_core::sequential::{sequential_update, SequentialSession};

pub use api::*;
pub use cache::{dataset_digest, Stage1Cache, Stage1Key};
pub use error::{ApiError, ErrorBody};
pub use store::{SessionStore, StoreError};

/// Response header reporting whether Stage I came from the cache.
pub const STAGE1_CACHE_HEADER: &str = "x-stage1-cache";

#[derive(Debug)]
pub struct AppState {
    pub store: SessionStore,
    pub cache: Stage1Cache,
}

impl AppState {
    pub fn open(session_dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        Ok(Self {
            store: SessionStore::open(session_dir)?,
            cache: Stage1Cache::default(),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/assess", post(handle_assess))
        .route("/plan", post(handle_plan))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/advance", post(advance_session))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheUse {
    Hit,
    Miss,
    /// Stage I was skipped.
    None,
}

impl CacheUse {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheUse::Hit => "hit",
            CacheUse::Miss => "miss",
            CacheUse::None => "none",
        }
    }
}

/// Runs an assessment request against the shared cache.
pub fn run_assess(state: &AppState, req: &AssessRequest) -> Result<(AssessResponse, CacheUse), ApiError> {
    let cfg = &req.config;
    cfg.validate()?;
    let integration = cfg.integration();
    if cfg.flat_curve {
        let curve = InducedLikelihoodCurve::flat();
        let mut assessment = assess_link(&req.history, &curve, &req.prior, &req.likelihood, &integration)
            .map_err(PipelineError::from)?;
        if let Some(link) = &req.link {
            assessment = assessment.for_link(link.clone());
        }
        return Ok((
            AssessResponse {
                assessment,
                stage1: None,
                curve: curve.points().to_vec(),
            },
            CacheUse::None,
        ));
    }
    let link = req
        .link
        .clone()
        .ok_or_else(|| ApiError::bad_request("invalid_request", "link is required"))?;
    let raw = match &req.dataset {
        Some(DatasetRef::Fixture(name)) if name == "table1" => table1(),
        Some(DatasetRef::Fixture(name)) => {
            return Err(ApiError::bad_request("unknown_dataset", format!("no bundled dataset {name:?}")))
        }
        Some(DatasetRef::Csv(text)) => parse_regional_csv(text).map_err(PipelineError::from)?,
        None => return Err(ApiError::bad_request("invalid_request", "dataset is required unless flat_curve is set")),
    };
    let data = prepare_dataset(&raw)?;
    let record = LinkRecord {
        link,
        history: req.history.clone(),
        covariates: req.covariates.clone(),
    };
    // fail on covariates before paying for Stage I
    let z = record.covariate_vector(&data).map_err(PipelineError::from)?;
    let settings = StageSettings {
        prior_sd: cfg.prior_sd,
        sampler: SamplerConfig {
            iterations: cfg.iterations,
            burn_in: cfg.burn_in,
            seed: cfg.seed,
        },
        curve: InducedCurveConfig {
            sampling: cfg.sampling,
            smoothing_window: cfg.window,
            seed: cfg.seed,
        },
        prior: req.prior,
        likelihood: req.likelihood,
        integration,
    };
    let digest = dataset_digest(&data);
    let key = Stage1Key::new(digest.clone(), cfg.prior_sd, cfg.iterations, cfg.burn_in, cfg.seed);
    let (draws, used) = match state.cache.get(&key) {
        Some(d) => (d, CacheUse::Hit),
        None => {
            let d = Arc::new(sample_stage1(&data, &settings)?);
            state.cache.insert(key, d.clone());
            (d, CacheUse::Miss)
        }
    };
    let curve = induce_curve(&draws, &z, &settings.curve).map_err(PipelineError::from)?;
    let assessment = assess_link(&record.history, &curve, &settings.prior, &settings.likelihood, &integration)
        .map_err(PipelineError::from)?
        .for_link(record.link);
    Ok((
        AssessResponse {
            assessment,
            stage1: Some(Stage1Summary {
                dataset_digest: digest,
                prior_sd: cfg.prior_sd,
                sampler: draws.meta.clone(),
                posterior_means: draws.means(),
            }),
            curve: curve.points().to_vec(),
        },
        used,
    ))
}

async fn handle_assess(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: AssessRequest = parse_body(&body)?;
    let (resp, used) = tokio::task::spawn_blocking(move || run_assess(&state, &req))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let mut out = Json(resp).into_response();
    out.headers_mut()
        .insert(STAGE1_CACHE_HEADER, HeaderValue::from_static(used.as_str()));
    Ok(out)
}

pub fn run_plan(req: &PlanRequest) -> Result<PlanResponse, ApiError> {
    let marginals = req.resolve_marginals()?;
    let decision = recommend(&req.network, &marginals, &req.model, &req.utility)?;
    Ok(PlanResponse {
        recommended: decision.recommended_route().clone(),
        marginals,
        decision,
    })
}

async fn handle_plan(body: Bytes) -> Result<Json<PlanResponse>, ApiError> {
    let req: PlanRequest = parse_body(&body)?;
    Ok(Json(run_plan(&req)?))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: CreateSessionRequest = parse_body(&body)?;
    let id = match req.session_id {
        Some(id) if store::valid_session_id(&id) => id,
        Some(id) => {
            return Err(ApiError::bad_request(
                "invalid_request",
                format!("session id {id:?} must be 1 to 64 letters, digits, '-' or '_'"),
            ))
        }
        None => uuid::Uuid::new_v4().to_string(),
    };
    let marginals = req.plan.resolve_marginals()?;
    let session = SequentialSession::start(id, req.plan.network, marginals, req.plan.model, req.plan.utility, req.poc)?
        .with_outcome_conditionals(req.outcome_conditionals)?;
    let session = state.store.create(session)?;
    Ok((StatusCode::CREATED, Json(SessionView::new(session, false))))
}

fn not_found(id: &str) -> ApiError {
    StoreError::NotFound(id.to_string()).into()
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = state.store.get(&id).ok_or_else(|| not_found(&id))?;
    Ok(Json(SessionView::new(session, false)))
}

async fn advance_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let req: AdvanceRequest = parse_body(&body)?;
    if req.dry_run {
        let current = state.store.get(&id).ok_or_else(|| not_found(&id))?;
        if current.revision != req.revision {
            return Err(StoreError::Stale {
                expected: req.revision,
                current: current.revision,
            }
            .into());
        }
        let preview = sequential_update(&current, &req.observation)?;
        return Ok(Json(SessionView::new(preview, true)));
    }
    let next = tokio::task::spawn_blocking(move || {
        state
            .store
            .advance(&id, req.revision, |s| sequential_update(s, &req.observation))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(SessionView::new(next, false)))
}
