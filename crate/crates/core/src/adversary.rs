//! Likelihoods of the attack propensity `p` given a link's crossing history.
//!
//! The adversarial form discounts long clean streaks: `n` clean crossings
//! weigh like `n^(1/n)` clean crossings rather than `n`, so the planner does
//! not grow complacent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CrossingHistory;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("propensity {0} is outside [0, 1]")]
pub struct PropensityDomainError(pub f64);

/// A long-run attack fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Propensity(f64);

impl Propensity {
    pub fn new(p: f64) -> Result<Self, PropensityDomainError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(PropensityDomainError(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Propensity {
    type Error = PropensityDomainError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl<'de> Deserialize<'de> for Propensity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Propensity::new(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodKind {
    Adversarial,
    Conventional,
}

impl LikelihoodKind {
    pub fn evaluate(self, p: Propensity, history: &CrossingHistory) -> f64 {
        match self {
            LikelihoodKind::Adversarial => adversarial_likelihood(p, history),
            LikelihoodKind::Conventional => conventional_likelihood(p, history),
        }
    }
}

/// Exponent applied to `(1 - p)`: `(n - Σx)^(1/n)`, or 0 for an empty history.
pub fn adversarial_clear_exponent(history: &CrossingHistory) -> f64 {
    let n = history.len();
    if n == 0 {
        return 0.0;
    }
    let clears = (n - history.incidents()) as f64;
    clears.powf(1.0 / n as f64)
}

/// `(1-p)^((n-Σx)^(1/n)) · p^(Σx)`; 1 for an empty history.
pub fn adversarial_likelihood(p: Propensity, history: &CrossingHistory) -> f64 {
    if history.is_empty() {
        return 1.0;
    }
    let p = p.get();
    (1.0 - p).powf(adversarial_clear_exponent(history)) * p.powi(history.incidents() as i32)
}

/// Bernoulli likelihood `p^(Σx) · (1-p)^(n-Σx)`.
pub fn conventional_likelihood(p: Propensity, history: &CrossingHistory) -> f64 {
    let p = p.get();
    let k = history.incidents();
    p.powi(k as i32) * (1.0 - p).powi((history.len() - k) as i32)
}
