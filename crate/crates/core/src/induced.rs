//! Monte Carlo induced likelihood of the propensity `p` for one link.
//!
//! Each posterior draw maps to a propensity `σ(z·β)` paired with its
//! posterior density value. Sorted by `p` and smoothed with a moving
//! average, these pairs trace a likelihood curve over `p`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CovariateVector;
use crate::logit::{logistic, BetaVector, LogitError, PosteriorDraws};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error(transparent)]
    Logit(#[from] LogitError),
    #[error("no posterior draws")]
    NoDraws,
    #[error("requested {requested} samples but only {available} draws exist")]
    NotEnoughDraws { requested: usize, available: usize },
    #[error("smoothing window must be odd and at least 1, got {0}")]
    BadWindow(usize),
    #[error("sample count {samples} is smaller than the smoothing window {window}")]
    WindowTooWide { samples: usize, window: usize },
    #[error("degenerate density values")]
    Degenerate,
    #[error("curve has no points")]
    Empty,
    #[error("curve points must be sorted by p within [0, 1] with finite non-negative weights")]
    InvalidPoints,
    #[error("p = {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// `σ(z·β)`, the propensity implied by one coefficient draw.
pub fn propensity_at(beta: &BetaVector, z: &CovariateVector) -> Result<f64, LogitError> {
    beta.dot(z).map(logistic)
}

/// How many posterior draws feed the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSampling {
    /// Subsample this many draws without replacement.
    Subsample(usize),
    /// Use every retained draw.
    AllDraws,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InducedCurveConfig {
    pub sampling: CurveSampling,
    pub smoothing_window: usize,
    pub seed: u64,
}

impl Default for InducedCurveConfig {
    fn default() -> Self {
        Self {
            sampling: CurveSampling::Subsample(60),
            smoothing_window: 5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub sample_count: usize,
    pub smoothing_window: usize,
    pub seed: Option<u64>,
    /// Always "max-is-one": weights are rescaled so the largest equals 1.
    pub normalization: String,
}

/// Likelihood over `p`, stored as knots sorted by `p` and interpolated
/// linearly between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedLikelihoodCurve {
    points: Vec<CurvePoint>,
    meta: CurveMeta,
}

impl InducedLikelihoodCurve {
    /// Builds a curve from explicit knots, rescaling so the largest weight is 1.
    pub fn from_points(points: Vec<CurvePoint>) -> Result<Self, CurveError> {
        let n = points.len();
        Self::with_meta(
            points,
            CurveMeta {
                sample_count: n,
                smoothing_window: 1,
                seed: None,
                normalization: "max-is-one".into(),
            },
        )
    }

    fn with_meta(mut points: Vec<CurvePoint>, meta: CurveMeta) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Empty);
        }
        let valid = points
            .iter()
            .all(|pt| (0.0..=1.0).contains(&pt.p) && pt.weight.is_finite() && pt.weight >= 0.0)
            && points.windows(2).all(|w| w[0].p <= w[1].p);
        if !valid {
            return Err(CurveError::InvalidPoints);
        }
        let max = points.iter().map(|pt| pt.weight).fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(CurveError::Degenerate);
        }
        for pt in &mut points {
            pt.weight /= max;
        }
        Ok(Self { points, meta })
    }

    /// Constant curve; useful for checking the fusion step against closed forms.
    pub fn flat() -> Self {
        Self::from_points(vec![CurvePoint { p: 0.5, weight: 1.0 }]).expect("valid flat curve")
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn meta(&self) -> &CurveMeta {
        &self.meta
    }

    /// Piecewise-linear interpolation, held flat beyond the outermost knots.
    pub fn evaluate(&self, p: f64) -> Result<f64, CurveError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(CurveError::OutOfRange(p));
        }
        let pts = &self.points;
        let first = pts.first().ok_or(CurveError::Empty)?;
        let last = pts.last().expect("non-empty");
        if p <= first.p {
            return Ok(first.weight);
        }
        if p >= last.p {
            return Ok(last.weight);
        }
        // first knot with knot.p >= p; exists and is > 0 given the checks above
        let hi = pts.partition_point(|pt| pt.p < p);
        let (a, b) = (pts[hi - 1], pts[hi]);
        if b.p == p {
            return Ok(b.weight);
        }
        let t = (p - a.p) / (b.p - a.p);
        Ok(a.weight + t * (b.weight - a.weight))
    }

    /// Two-column `p,weight` CSV for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,weight\n");
        for pt in &self.points {
            out.push_str(&format!("{},{}\n", pt.p, pt.weight));
        }
        out
    }
}

/// Centered moving average, truncated at the ends.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Builds the induced likelihood curve for covariates `z`.
///
/// Draws are subsampled without replacement, mapped to
/// `(σ(z·β), exp(log π − max log π))`, sorted by `p` (ties by draw index),
/// smoothed by a centered moving average and rescaled to a maximum of 1.
pub fn induce_curve(
    draws: &PosteriorDraws,
    z: &CovariateVector,
    cfg: &InducedCurveConfig,
) -> Result<InducedLikelihoodCurve, CurveError> {
    if draws.is_empty() {
        return Err(CurveError::NoDraws);
    }
    if cfg.smoothing_window == 0 || cfg.smoothing_window.is_multiple_of(2) {
        return Err(CurveError::BadWindow(cfg.smoothing_window));
    }
    let mut indices: Vec<usize> = match cfg.sampling {
        CurveSampling::AllDraws => (0..draws.len()).collect(),
        CurveSampling::Subsample(count) => {
            if count > draws.len() {
                return Err(CurveError::NotEnoughDraws {
                    requested: count,
                    available: draws.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rand::seq::index::sample(&mut rng, draws.len(), count).into_vec()
        }
    };
    if indices.len() < cfg.smoothing_window {
        return Err(CurveError::WindowTooWide {
            samples: indices.len(),
            window: cfg.smoothing_window,
        });
    }
    indices.sort_unstable();

    let mut pairs = indices
        .iter()
        .map(|&i| {
            let d = &draws.draws[i];
            Ok((propensity_at(&d.beta, z)?, d.log_posterior, i))
        })
        .collect::<Result<Vec<_>, CurveError>>()?;
    let max_log = pairs
        .iter()
        .map(|&(_, lp, _)| lp)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_log.is_finite() {
        return Err(CurveError::Degenerate);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

    let raw: Vec<f64> = pairs.iter().map(|&(_, lp, _)| (lp - max_log).exp()).collect();
    if raw.iter().all(|&w| w == 0.0) {
        return Err(CurveError::Degenerate);
    }
    let smoothed = moving_average(&raw, cfg.smoothing_window);
    let points = pairs
        .iter()
        .zip(smoothed)
        .map(|(&(p, _, _), weight)| CurvePoint { p, weight })
        .collect();
    InducedLikelihoodCurve::with_meta(
        points,
        CurveMeta {
            sample_count: indices.len(),
            smoothing_window: cfg.smoothing_window,
            seed: match cfg.sampling {
                CurveSampling::Subsample(_) => Some(cfg.seed),
                CurveSampling::AllDraws => None,
            },
            normalization: "max-is-one".into(),
        },
    )
}
