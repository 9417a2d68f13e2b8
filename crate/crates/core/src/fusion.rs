//! Combines the prior over `p`, the crossing-history likelihood and the
//! induced likelihood curve into the probability that the next crossing of a
//! link meets an IED.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{LikelihoodKind, Propensity};
use crate::induced::{induce_curve, CurveError, CurveMeta, InducedCurveConfig, InducedLikelihoodCurve};
use crate::ingest::{CovariateVector, CrossingHistory, RegionalDataset, PRECEDING_INCIDENT};
use crate::logit::{fit_mle, sample_posterior, GaussianPrior, LogitError, SamplerConfig};
use crate::netmodel::LinkId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Logit(#[from] LogitError),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid integration settings: {0}")]
    InvalidIntegration(String),
    #[error("invalid history likelihood: {0}")]
    InvalidLikelihood(String),
    #[error("integrand vanishes on the whole grid")]
    ZeroEvidence,
    #[error("dataset has no `{PRECEDING_INCIDENT}` column as its last covariate")]
    NotExpanded,
    #[error("covariate vector has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Prior over the propensity `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    #[default]
    Uniform,
    Beta { a: f64, b: f64 },
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), FusionError> {
        match *self {
            PriorSpec::Uniform => Ok(()),
            PriorSpec::Beta { a, b } => {
                if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(FusionError::InvalidPrior(format!(
                        "beta parameters must be positive, got a={a}, b={b}"
                    )))
                }
            }
        }
    }

    /// Density up to a constant factor. Infinite at an endpoint when the
    /// corresponding shape parameter is below 1.
    pub fn unnormalized_density(&self, p: f64) -> f64 {
        match *self {
            PriorSpec::Uniform => 1.0,
            PriorSpec::Beta { a, b } => {
                let left = if a == 1.0 { 1.0 } else { p.powf(a - 1.0) };
                let right = if b == 1.0 { 1.0 } else { (1.0 - p).powf(b - 1.0) };
                left * right
            }
        }
    }
}

/// Quadrature over `p` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IntegrationConfig {
    /// `p = 0.05, 0.10, ..., 1.00`, summed with equal weights 0.05.
    PaperGrid,
    /// Trapezoid rule on a uniform grid from 0 to 1.
    Fine { step: f64 },
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig::Fine { step: 0.001 }
    }
}

/// Quadrature nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub p: Vec<f64>,
    pub weights: Vec<f64>,
    /// Spacing between nodes; singular endpoints are evaluated this far inside.
    half_step: f64,
}

impl IntegrationConfig {
    pub fn grid(&self) -> Result<Grid, FusionError> {
        match *self {
            IntegrationConfig::PaperGrid => Ok(Grid {
                p: (1..=20).map(|i| i as f64 / 20.0).collect(),
                weights: vec![0.05; 20],
                half_step: 0.025,
            }),
            IntegrationConfig::Fine { step } => {
                if !(step > 0.0 && step <= 0.5) {
                    return Err(FusionError::InvalidIntegration(format!(
                        "step must lie in (0, 0.5], got {step}"
                    )));
                }
                let n = (1.0 / step).round() as usize;
                if ((n as f64) * step - 1.0).abs() > 1e-9 {
                    return Err(FusionError::InvalidIntegration(format!(
                        "step {step} does not divide [0, 1] evenly"
                    )));
                }
                let h = 1.0 / n as f64;
                let p = (0..=n).map(|i| i as f64 / n as f64).collect();
                let mut weights = vec![h; n + 1];
                weights[0] = h / 2.0;
                weights[n] = h / 2.0;
                Ok(Grid {
                    p,
                    weights,
                    half_step: h / 2.0,
                })
            }
        }
    }
}

impl Grid {
    /// Prior density at node `i`, nudged half a step inward where it is infinite.
    fn prior_at(&self, prior: &PriorSpec, i: usize) -> f64 {
        let p = self.p[i];
        let d = prior.unnormalized_density(p);
        if d.is_finite() {
            return d;
        }
        let inside = if p < 0.5 { p + self.half_step } else { p - self.half_step };
        prior.unnormalized_density(inside)
    }
}

/// History likelihood `scale · L(p; x)^exponent`.
///
/// `scale` cancels from every normalized result; `exponent` above 1 sharpens
/// the history's influence and below 1 softens it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryLikelihood {
    pub kind: LikelihoodKind,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

impl HistoryLikelihood {
    pub fn new(kind: LikelihoodKind) -> Self {
        Self {
            kind,
            scale: 1.0,
            exponent: 1.0,
        }
    }

    pub fn adversarial() -> Self {
        Self::new(LikelihoodKind::Adversarial)
    }

    pub fn conventional() -> Self {
        Self::new(LikelihoodKind::Conventional)
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(FusionError::InvalidLikelihood(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(FusionError::InvalidLikelihood(format!(
                "exponent must be positive, got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, p: f64, history: &CrossingHistory) -> f64 {
        let p = Propensity::new(p).expect("grid nodes lie in [0, 1]");
        let l = self.kind.evaluate(p, history);
        let l = if self.exponent == 1.0 { l } else { l.powf(self.exponent) };
        self.scale * l
    }
}

impl Default for HistoryLikelihood {
    fn default() -> Self {
        Self::adversarial()
    }
}

/// Normalized posterior density of `p` tabulated on a quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorOverP {
    pub p: Vec<f64>,
    pub density: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PosteriorOverP {
    pub fn mean(&self) -> f64 {
        self.p
            .iter()
            .zip(&self.density)
            .zip(&self.weights)
            .map(|((p, d), w)| p * d * w)
            .sum()
    }

    /// Grid node carrying the most posterior mass.
    pub fn mode(&self) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for ((p, d), w) in self.p.iter().zip(&self.density).zip(&self.weights) {
            if d * w > best.1 {
                best = (*p, d * w);
            }
        }
        best.0
    }
}

/// `π(p | Z, D*) ∝ curve(p) · prior(p)`, normalized over the grid.
pub fn posterior_over_p(
    curve: &InducedLikelihoodCurve,
    prior: &PriorSpec,
    cfg: &IntegrationConfig,
) -> Result<PosteriorOverP, FusionError> {
    prior.validate()?;
    let grid = cfg.grid()?;
    let raw = (0..grid.p.len())
        .map(|i| Ok(curve.evaluate(grid.p[i])? * grid.prior_at(prior, i)))
        .collect::<Result<Vec<f64>, FusionError>>()?;
    let total: f64 = raw.iter().zip(&grid.weights).map(|(d, w)| d * w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(FusionError::ZeroEvidence);
    }
    Ok(PosteriorOverP {
        density: raw.iter().map(|d| d / total).collect(),
        p: grid.p,
        weights: grid.weights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentProvenance {
    pub history_length: usize,
    pub incidents: usize,
    pub prior: PriorSpec,
    pub integration: IntegrationConfig,
    pub likelihood: HistoryLikelihood,
    pub curve: CurveMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkAssessment {
    pub link: Option<LinkId>,
    pub p_attack: f64,
    pub p_clear: f64,
    pub unnormalized_attack: f64,
    pub unnormalized_clear: f64,
    pub normalizing_constant: f64,
    pub provenance: AssessmentProvenance,
}

impl LinkAssessment {
    pub fn for_link(mut self, link: LinkId) -> Self {
        self.link = Some(link);
        self
    }

    /// Plain `key: value` lines for audit logs.
    pub fn to_record(&self) -> String {
        let link = self.link.as_ref().map_or("-".to_string(), |l| l.to_string());
        format!(
            "link: {link}\np_attack: {}\np_clear: {}\nunnormalized_attack: {}\nunnormalized_clear: {}\nnormalizing_constant: {}\nhistory_length: {}\nincidents: {}\nprior: {}\nintegration: {}\nlikelihood: {}\ncurve_samples: {}\ncurve_window: {}\ncurve_seed: {}\n",
            self.p_attack,
            self.p_clear,
            self.unnormalized_attack,
            self.unnormalized_clear,
            self.normalizing_constant,
            self.provenance.history_length,
            self.provenance.incidents,
            serde_json::to_string(&self.provenance.prior).expect("serializable"),
            serde_json::to_string(&self.provenance.integration).expect("serializable"),
            serde_json::to_string(&self.provenance.likelihood).expect("serializable"),
            self.provenance.curve.sample_count,
            self.provenance.curve.smoothing_window,
            self.provenance
                .curve
                .seed
                .map_or("-".to_string(), |s| s.to_string()),
        )
    }
}

/// Attack and clear integrals of `p · L(p;x) · curve(p) · prior(p)` and its
/// `(1 - p)` counterpart, then their ratio.
pub fn assess_link(
    history: &CrossingHistory,
    curve: &InducedLikelihoodCurve,
    prior: &PriorSpec,
    likelihood: &HistoryLikelihood,
    cfg: &IntegrationConfig,
) -> Result<LinkAssessment, FusionError> {
    prior.validate()?;
    likelihood.validate()?;
    let grid = cfg.grid()?;
    let (mut attack, mut clear) = (0.0, 0.0);
    for i in 0..grid.p.len() {
        let p = grid.p[i];
        let base = likelihood.evaluate(p, history) * curve.evaluate(p)? * grid.prior_at(prior, i);
        attack += grid.weights[i] * p * base;
        clear += grid.weights[i] * (1.0 - p) * base;
    }
    let total = attack + clear;
    if !(total > 0.0 && total.is_finite()) {
        return Err(FusionError::ZeroEvidence);
    }
    Ok(LinkAssessment {
        link: None,
        p_attack: attack / total,
        p_clear: clear / total,
        unnormalized_attack: attack,
        unnormalized_clear: clear,
        normalizing_constant: total,
        provenance: AssessmentProvenance {
            history_length: history.len(),
            incidents: history.incidents(),
            prior: *prior,
            integration: *cfg,
            likelihood: *likelihood,
            curve: curve.meta().clone(),
        },
    })
}

/// Stage I and Stage II settings shared by the full assessment pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSettings {
    pub prior_sd: f64,
    pub sampler: SamplerConfig,
    pub curve: InducedCurveConfig,
    pub prior: PriorSpec,
    pub likelihood: HistoryLikelihood,
    pub integration: IntegrationConfig,
}

impl Default for StageSettings {
    fn default() -> Self {
        Self {
            prior_sd: 10.0,
            sampler: SamplerConfig::default(),
            curve: InducedCurveConfig::default(),
            prior: PriorSpec::Uniform,
            likelihood: HistoryLikelihood::adversarial(),
            integration: IntegrationConfig::default(),
        }
    }
}

impl StageSettings {
    /// The coarse 0.05 grid with 60 curve samples and a window of 5.
    pub fn paper_compat(seed: u64) -> Self {
        Self {
            sampler: SamplerConfig {
                seed,
                ..SamplerConfig::default()
            },
            curve: InducedCurveConfig {
                seed,
                ..InducedCurveConfig::default()
            },
            integration: IntegrationConfig::PaperGrid,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalAssessment {
    pub assessment: LinkAssessment,
    /// The indicator column cannot be identified from the data (for example
    /// it is constant), so its coefficient is driven by the prior alone.
    pub degenerate: bool,
    pub indicator: bool,
}

/// Assessment conditioned on what happened on the preceding link.
///
/// `data` must already carry the preceding-incident indicator as its last
/// column and `z` must hold the other covariates; the indicator value is
/// appended from `preceded_by_incident`.
pub fn assess_conditional(
    history: &CrossingHistory,
    data: &RegionalDataset,
    z: &CovariateVector,
    preceded_by_incident: bool,
    settings: &StageSettings,
) -> Result<ConditionalAssessment, FusionError> {
    if data.covariate_names.last().map(String::as_str) != Some(PRECEDING_INCIDENT) {
        return Err(FusionError::NotExpanded);
    }
    if z.dim() + 1 != data.dim() {
        return Err(FusionError::DimensionMismatch {
            expected: data.dim() - 1,
            found: z.dim(),
        });
    }
    let degenerate = match fit_mle(data, 100, 1e-8) {
        Ok(_) => false,
        Err(LogitError::RankDeficient { .. }) => true,
        // a proper prior keeps the posterior well defined when Newton stalls
        Err(LogitError::NotConverged { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    let prior = GaussianPrior::isotropic(data.dim(), 0.0, settings.prior_sd);
    let draws = sample_posterior(data, &prior, settings.sampler)?;
    let z = z.with_appended(if preceded_by_incident { 1.0 } else { 0.0 });
    let curve = induce_curve(&draws, &z, &settings.curve)?;
    let assessment = assess_link(
        history,
        &curve,
        &settings.prior,
        &settings.likelihood,
        &settings.integration,
    )?;
    Ok(ConditionalAssessment {
        assessment,
        degenerate,
        indicator: preceded_by_incident,
    })
}
