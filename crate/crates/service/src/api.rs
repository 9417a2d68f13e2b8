//! Request and response documents.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use routerisk_core::decision::{
    scale_link_probabilities, DecisionResult, DependencyModel, LinkProbabilities, UtilitySpec,
};
use routerisk_core::fusion::{HistoryLikelihood, IntegrationConfig, LinkAssessment, PriorSpec};
use routerisk_core::induced::{CurvePoint, CurveSampling};
use routerisk_core::ingest::CrossingHistory;
use routerisk_core::logit::SamplerMeta;
use routerisk_core::netmodel::{LinkId, Network, Route};
use routerisk_core::sequential::{Continuation, Observation, OutcomeConditional, PocSettings, SequentialSession};

use crate::error::ApiError;

/// Parses a JSON body, mapping any failure to a 400.
pub fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| {
        ApiError::bad_request("invalid_request", e.to_string())
            .with_detail(serde_json::json!({ "line": e.line(), "column": e.column() }))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetRef {
    /// A bundled dataset by name; only `table1` exists.
    Fixture(String),
    /// Inline regional CSV.
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessConfig {
    pub prior_sd: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub sampling: CurveSampling,
    pub window: usize,
    pub integration: IntegrationConfig,
    /// Forces the coarse 0.05 grid.
    pub paper_compat: bool,
    /// Skips both stages and uses a constant curve.
    pub flat_curve: bool,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            prior_sd: 10.0,
            iterations: 11_000,
            burn_in: 1_000,
            seed: 1,
            sampling: CurveSampling::Subsample(60),
            window: 5,
            integration: IntegrationConfig::default(),
            paper_compat: false,
            flat_curve: false,
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<(), ApiError> {
        if !(self.prior_sd > 0.0 && self.prior_sd.is_finite()) {
            return Err(ApiError::bad_request("invalid_config", format!("prior_sd must be positive, got {}", self.prior_sd)));
        }
        if self.iterations <= self.burn_in {
            return Err(ApiError::bad_request(
                "invalid_config",
                format!("iterations ({}) must exceed burn_in ({})", self.iterations, self.burn_in),
            ));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(ApiError::bad_request("invalid_config", format!("window must be odd, got {}", self.window)));
        }
        if let CurveSampling::Subsample(n) = self.sampling {
            if n < self.window {
                return Err(ApiError::bad_request(
                    "invalid_config",
                    format!("{n} samples cannot fill a window of {}", self.window),
                ));
            }
        }
        Ok(())
    }

    pub fn integration(&self) -> IntegrationConfig {
        if self.paper_compat {
            IntegrationConfig::PaperGrid
        } else {
            self.integration
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessRequest {
    #[serde(default)]
    pub dataset: Option<DatasetRef>,
    #[serde(default)]
    pub link: Option<LinkId>,
    #[serde(default)]
    pub history: CrossingHistory,
    #[serde(default)]
    pub covariates: BTreeMap<String, f64>,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub likelihood: HistoryLikelihood,
    #[serde(default)]
    pub config: AssessConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Summary {
    pub dataset_digest: String,
    pub prior_sd: f64,
    pub sampler: SamplerMeta,
    pub posterior_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessResponse {
    pub assessment: LinkAssessment,
    pub stage1: Option<Stage1Summary>,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub reference_link: LinkId,
    pub reference_p: f64,
    #[serde(default)]
    pub round_to_cents: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub network: Network,
    #[serde(default)]
    pub marginals: Option<LinkProbabilities>,
    /// Alternative to `marginals`: scale one assessed link by length.
    #[serde(default)]
    pub calibration: Option<Calibration>,
    #[serde(default)]
    pub model: DependencyModel,
    #[serde(default)]
    pub utility: UtilitySpec,
}

impl PlanRequest {
    /// Validates the network and every link reference, and returns the
    /// per-link probabilities to plan with.
    pub fn resolve_marginals(&self) -> Result<LinkProbabilities, ApiError> {
        self.network
            .ensure_valid()
            .map_err(|e| ApiError::bad_request("invalid_network", e.to_string()))?;
        let known = |id: &LinkId| self.network.link(id).is_some();
        let unknown = |id: &LinkId| ApiError::bad_request("unknown_link", format!("link {id} is not in the network"));
        if let DependencyModel::ConditionalChain { conditionals } = &self.model {
            for c in conditionals {
                for id in [&c.given, &c.target] {
                    if !known(id) {
                        return Err(unknown(id));
                    }
                }
            }
        }
        let marginals = match (&self.marginals, &self.calibration) {
            (Some(m), None) => {
                if let Some(id) = m.0.keys().find(|id| !known(id)) {
                    return Err(unknown(id));
                }
                m.clone()
            }
            (None, Some(c)) => {
                if !known(&c.reference_link) {
                    return Err(unknown(&c.reference_link));
                }
                scale_link_probabilities(&self.network, &c.reference_link, c.reference_p, c.round_to_cents)?
            }
            _ => {
                return Err(ApiError::bad_request(
                    "invalid_request",
                    "give exactly one of marginals and calibration",
                ))
            }
        };
        marginals.check_covers(&self.network)?;
        Ok(marginals)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub marginals: LinkProbabilities,
    pub decision: DecisionResult,
    pub recommended: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    /// Chosen by the server when absent.
    #[serde(default)]
    pub session_id: Option<String>,
    pub plan: PlanRequest,
    #[serde(default)]
    pub poc: PocSettings,
    #[serde(default)]
    pub outcome_conditionals: Vec<OutcomeConditional>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvanceRequest {
    /// Revision the client last saw.
    pub revision: u64,
    pub observation: Observation,
    /// Computes the update without committing it.
    #[serde(default)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session: SequentialSession,
    pub recommended: Option<Route>,
    pub continuations: Vec<Continuation>,
    pub dry_run: bool,
}

impl SessionView {
    pub fn new(session: SequentialSession, dry_run: bool) -> Self {
        Self {
            recommended: session.current_decision().map(|d| d.recommended_route().clone()),
            continuations: session.continuations(),
            session,
            dry_run,
        }
    }
}
