//! Bayesian logistic regression on the regional dataset.
//!
//! [`sample_posterior`] draws coefficient vectors with a per-coordinate
//! random-walk Metropolis kernel and records the log unnormalized posterior
//! of every retained draw; [`fit_mle`] gives the Newton-Raphson maximum
//! likelihood fit for comparison.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CovariateVector, RegionalDataset};

/// Coefficient magnitude past which the fit is treated as separated.
pub const SEPARATION_LIMIT: f64 = 50.0;

const ADAPT_BATCH: usize = 50;
const STEP_TOLERANCE: f64 = 1e-3;
const TARGET_ACCEPT: (f64, f64) = (0.30, 0.45);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogitError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("design matrix is rank deficient (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },
    #[error("need at least {needed} rows to fit {needed} coefficients, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("possible separation: coefficient {index} reached {value:.3e}")]
    PossibleSeparation { index: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (gradient max-norm {gradient:.3e})")]
    NotConverged { iterations: usize, gradient: f64 },
    #[error("invalid sampler settings: {0}")]
    InvalidConfig(String),
    #[error("log posterior is not finite at the starting point")]
    NonFiniteStart,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
}

/// Logistic function, stable for large `|eta|`.
pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Regression coefficients, intercept first when the dataset has one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BetaVector(pub Vec<f64>);

impl BetaVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, z: &CovariateVector) -> Result<f64, LogitError> {
        if z.dim() != self.dim() {
            return Err(LogitError::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(self.0.iter().zip(z.values()).map(|(b, z)| b * z).sum())
    }
}

/// Independent normal priors on the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrior {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl GaussianPrior {
    pub fn isotropic(dim: usize, mean: f64, sd: f64) -> Self {
        Self {
            mean: vec![mean; dim],
            sd: vec![sd; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self) -> Result<(), LogitError> {
        if self.mean.len() != self.sd.len() {
            return Err(LogitError::InvalidPrior(
                "mean and sd have different lengths".into(),
            ));
        }
        if let Some(sd) = self.sd.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(LogitError::InvalidPrior(format!("sd {sd} is not positive")));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(LogitError::InvalidPrior("mean is not finite".into()));
        }
        Ok(())
    }

    fn log_density_at(&self, index: usize, value: f64) -> f64 {
        let (m, s) = (self.mean[index], self.sd[index]);
        let u = (value - m) / s;
        -0.5 * u * u - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    pub fn log_density(&self, beta: &BetaVector) -> f64 {
        beta.0
            .iter()
            .enumerate()
            .map(|(i, &b)| self.log_density_at(i, b))
            .sum()
    }
}

fn check_dims(beta: &BetaVector, data: &RegionalDataset) -> Result<(), LogitError> {
    if beta.dim() != data.dim() {
        return Err(LogitError::DimensionMismatch {
            expected: data.dim(),
            found: beta.dim(),
        });
    }
    Ok(())
}

fn row_log_likelihood(y: bool, eta: f64) -> f64 {
    // y·log σ(η) + (1−y)·log(1−σ(η)) = y·η − ln(1+e^η)
    (if y { eta } else { 0.0 }) - softplus(eta)
}

/// Bernoulli log-likelihood of the regional outcomes under `beta`.
pub fn log_likelihood(beta: &BetaVector, data: &RegionalDataset) -> Result<f64, LogitError> {
    check_dims(beta, data)?;
    data.rows
        .iter()
        .map(|r| beta.dot(&r.z).map(|eta| row_log_likelihood(r.y, eta)))
        .sum()
}

/// Log-likelihood plus log prior density (normalizing constants of the
/// normal priors included).
pub fn log_unnormalized_posterior(
    beta: &BetaVector,
    data: &RegionalDataset,
    prior: &GaussianPrior,
) -> Result<f64, LogitError> {
    prior.validate()?;
    if prior.dim() != beta.dim() {
        return Err(LogitError::DimensionMismatch {
            expected: beta.dim(),
            found: prior.dim(),
        });
    }
    Ok(log_likelihood(beta, data)? + prior.log_density(beta))
}

fn design_matrix(data: &RegionalDataset) -> DMatrix<f64> {
    DMatrix::from_fn(data.len(), data.dim(), |i, j| data.rows[i].z.values()[j])
}

/// Numerical rank of the design matrix.
pub fn design_rank(data: &RegionalDataset) -> usize {
    if data.is_empty() || data.dim() == 0 {
        return 0;
    }
    let svd = design_matrix(data).svd(false, false);
    let max = svd.singular_values.max();
    let tol = max * (data.len().max(data.dim()) as f64) * f64::EPSILON * 16.0;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleDiagnostics {
    pub gradient_max_norm: f64,
    pub iterations: usize,
    /// Ratio of the largest to smallest eigenvalue of the observed information.
    pub hessian_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub beta: BetaVector,
    pub log_likelihood: f64,
    pub diagnostics: MleDiagnostics,
}

fn gradient_and_information(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let eta = x * beta;
    let p = eta.map(logistic);
    let grad = x.transpose() * (y - &p);
    let w = p.map(|q| q * (1.0 - q));
    let mut info = DMatrix::zeros(x.ncols(), x.ncols());
    for (i, row) in x.row_iter().enumerate() {
        info += row.transpose() * row * w[i];
    }
    (grad, info)
}

/// Newton-Raphson maximum likelihood fit, stopping when the gradient
/// max-norm is at most `tol`.
pub fn fit_mle(data: &RegionalDataset, max_iter: usize, tol: f64) -> Result<MleFit, LogitError> {
    let dim = data.dim();
    if data.len() < dim {
        return Err(LogitError::TooFewRows {
            needed: dim,
            found: data.len(),
        });
    }
    let rank = design_rank(data);
    if rank < dim {
        return Err(LogitError::RankDeficient { rank, dim });
    }
    let x = design_matrix(data);
    let y = DVector::from_iterator(data.len(), data.rows.iter().map(|r| f64::from(u8::from(r.y))));
    let loglik = |b: &DVector<f64>| -> f64 {
        let eta = &x * b;
        eta.iter()
            .zip(y.iter())
            .map(|(&e, &yy)| row_log_likelihood(yy > 0.5, e))
            .sum()
    };

    let mut beta = DVector::zeros(dim);
    let mut current = loglik(&beta);
    for iter in 0..=max_iter {
        let (grad, info) = gradient_and_information(&x, &y, &beta);
        let gmax = grad.amax();
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        // under separation the gradient vanishes while Newton steps stay large
        if gmax <= tol && step.amax() < STEP_TOLERANCE {
            let eig = info.clone().symmetric_eigen();
            let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
            return Ok(MleFit {
                beta: BetaVector(beta.iter().copied().collect()),
                log_likelihood: current,
                diagnostics: MleDiagnostics {
                    gradient_max_norm: gmax,
                    iterations: iter,
                    hessian_condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
                },
            });
        }
        if iter == max_iter {
            return Err(LogitError::NotConverged {
                iterations: max_iter,
                gradient: gmax,
            });
        }
        // step halving keeps every accepted iterate an ascent step
        let mut scale = 1.0;
        loop {
            let candidate = &beta + &step * scale;
            let value = loglik(&candidate);
            if value >= current - 1e-12 * current.abs().max(1.0) || scale < 1e-10 {
                beta = candidate;
                current = value;
                break;
            }
            scale *= 0.5;
        }
        if let Some((index, &value)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || b.abs() > SEPARATION_LIMIT)
        {
            return Err(LogitError::PossibleSeparation { index, value });
        }
    }
    unreachable!("loop returns on the final iteration")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in)
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 11_000,
            burn_in: 1_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub beta: BetaVector,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerMeta {
    pub iterations: usize,
    pub burn_in: usize,
    pub seeds: Vec<u64>,
    /// Fraction of accepted coordinate proposals after burn-in.
    pub acceptance_rate: f64,
    pub coordinate_acceptance: Vec<f64>,
    /// Proposal standard deviations frozen at the end of burn-in.
    pub proposal_scales: Vec<f64>,
}

/// Retained posterior draws with their log unnormalized posterior values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub draws: Vec<Draw>,
    pub meta: SamplerMeta,
}

impl PosteriorDraws {
    pub fn dim(&self) -> usize {
        self.draws.first().map_or(0, |d| d.beta.dim())
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn coordinate(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.draws.iter().map(move |d| d.beta.0[index])
    }

    pub fn means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim())
            .map(|j| self.coordinate(j).sum::<f64>() / n)
            .collect()
    }

    /// Sample skewness (third standardized moment) per coordinate.
    pub fn skewness(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.means()
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let (m2, m3) = self.coordinate(j).fold((0.0, 0.0), |(a, b), v| {
                    let d = v - m;
                    (a + d * d, b + d * d * d)
                });
                let (m2, m3) = (m2 / n, m3 / n);
                m3 / m2.powf(1.5)
            })
            .collect()
    }

    /// One row per draw: `beta_0..beta_k,log_post`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.dim()).map(|j| format!("beta_{j}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",log_post\n");
        for d in &self.draws {
            for v in &d.beta.0 {
                out.push_str(&v.to_string());
                out.push(',');
            }
            out.push_str(&d.log_posterior.to_string());
            out.push('\n');
        }
        out
    }
}

/// Effective sample size of a single chain using Geyer's initial positive
/// sequence of paired autocorrelations.
pub fn effective_sample_size(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = chain.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

/// Random-walk Metropolis within Gibbs over the coefficients.
///
/// Proposal scales adapt in batches of 50 sweeps during burn-in, steering each
/// coordinate's acceptance into [0.30, 0.45], and are frozen afterwards.
pub fn sample_posterior(
    data: &RegionalDataset,
    prior: &GaussianPrior,
    cfg: SamplerConfig,
) -> Result<PosteriorDraws, LogitError> {
    if cfg.iterations <= cfg.burn_in {
        return Err(LogitError::InvalidConfig(format!(
            "iterations ({}) must exceed burn-in ({})",
            cfg.iterations, cfg.burn_in
        )));
    }
    prior.validate()?;
    let dim = data.dim();
    if prior.dim() != dim {
        return Err(LogitError::DimensionMismatch {
            expected: dim,
            found: prior.dim(),
        });
    }
    if dim == 0 {
        return Err(LogitError::InvalidConfig("dataset has no covariates".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut beta = BetaVector(prior.mean.clone());
    let mut eta: Vec<f64> = data
        .rows
        .iter()
        .map(|r| beta.dot(&r.z))
        .collect::<Result<_, _>>()?;
    let loglik_of = |eta: &[f64]| -> f64 {
        data.rows
            .iter()
            .zip(eta)
            .map(|(r, &e)| row_log_likelihood(r.y, e))
            .sum()
    };
    let mut loglik = loglik_of(&eta);
    let mut logprior: Vec<f64> = (0..dim).map(|j| prior.log_density_at(j, beta.0[j])).collect();
    if !(loglik + logprior.iter().sum::<f64>()).is_finite() {
        return Err(LogitError::NonFiniteStart);
    }

    let mut scales: Vec<f64> = prior.sd.iter().map(|s| s.min(1.0)).collect();
    let mut batch_accepts = vec![0usize; dim];
    let mut accepts = vec![0usize; dim];
    let mut draws = Vec::with_capacity(cfg.retained());
    let mut proposal_eta = vec![0.0; eta.len()];

    for sweep in 0..cfg.iterations {
        let burning = sweep < cfg.burn_in;
        for j in 0..dim {
            let step = scales[j] * rng.sample::<f64, _>(StandardNormal);
            let proposed = beta.0[j] + step;
            for ((pe, e), r) in proposal_eta.iter_mut().zip(&eta).zip(&data.rows) {
                *pe = e + step * r.z.values()[j];
            }
            let new_loglik = loglik_of(&proposal_eta);
            let new_logprior = prior.log_density_at(j, proposed);
            let log_ratio = new_loglik + new_logprior - loglik - logprior[j];
            let u: f64 = rng.random();
            if log_ratio.is_finite() && u.ln() < log_ratio {
                beta.0[j] = proposed;
                std::mem::swap(&mut eta, &mut proposal_eta);
                loglik = new_loglik;
                logprior[j] = new_logprior;
                if burning {
                    batch_accepts[j] += 1;
                } else {
                    accepts[j] += 1;
                }
            }
        }
        if burning && (sweep + 1) % ADAPT_BATCH == 0 {
            for (scale, acc) in scales.iter_mut().zip(batch_accepts.iter_mut()) {
                let rate = *acc as f64 / ADAPT_BATCH as f64;
                if rate < TARGET_ACCEPT.0 {
                    *scale *= 0.8;
                } else if rate > TARGET_ACCEPT.1 {
                    *scale *= 1.25;
                }
                *acc = 0;
            }
        }
        if !burning {
            draws.push(Draw {
                beta: beta.clone(),
                log_posterior: loglik + logprior.iter().sum::<f64>(),
            });
        }
    }

    let retained = cfg.retained() as f64;
    let coordinate_acceptance: Vec<f64> = accepts.iter().map(|&a| a as f64 / retained).collect();
    let acceptance_rate = coordinate_acceptance.iter().sum::<f64>() / dim as f64;
    Ok(PosteriorDraws {
        draws,
        meta: SamplerMeta {
            iterations: cfg.iterations,
            burn_in: cfg.burn_in,
            seeds: vec![cfg.seed],
            acceptance_rate,
            coordinate_acceptance,
            proposal_scales: scales,
        },
    })
}

/// Runs one chain per seed on separate threads and concatenates the retained
/// draws in seed order.
pub fn sample_chains(
    data: &RegionalDataset,
    prior: &GaussianPrior,
    iterations: usize,
    burn_in: usize,
    seeds: &[u64],
) -> Result<PosteriorDraws, LogitError> {
    if seeds.is_empty() {
        return Err(LogitError::InvalidConfig("no chain seeds given".into()));
    }
    let chains: Vec<Result<PosteriorDraws, LogitError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || {
                    sample_posterior(
                        data,
                        prior,
                        SamplerConfig {
                            iterations,
                            burn_in,
                            seed,
                        },
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    let chains = chains.into_iter().collect::<Result<Vec<_>, _>>()?;
    let dim = chains[0].dim();
    let total: usize = chains.iter().map(PosteriorDraws::len).sum();
    let mut coordinate_acceptance = vec![0.0; dim];
    for c in &chains {
        for (acc, v) in coordinate_acceptance.iter_mut().zip(&c.meta.coordinate_acceptance) {
            *acc += v * c.len() as f64 / total as f64;
        }
    }
    let proposal_scales = chains[0].meta.proposal_scales.clone();
    Ok(PosteriorDraws {
        draws: chains.into_iter().flat_map(|c| c.draws).collect(),
        meta: SamplerMeta {
            iterations,
            burn_in,
            seeds: seeds.to_vec(),
            acceptance_rate: coordinate_acceptance.iter().sum::<f64>() / dim as f64,
            coordinate_acceptance,
            proposal_scales,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ingest::{parse_regional_csv, with_intercept, RegionalRecord};
    use proptest::prelude::*;

    fn table1() -> RegionalDataset {
        with_intercept(&fixtures::table1()).unwrap()
    }

    fn toy(rows: &[(bool, &[f64])]) -> RegionalDataset {
        RegionalDataset {
            label_column: "l".into(),
            response_column: "y".into(),
            covariate_names: (0..rows[0].1.len()).map(|i| format!("c{i}")).collect(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, (y, z))| RegionalRecord {
                    label: i.to_string(),
                    y: *y,
                    z: CovariateVector(z.to_vec()),
                })
                .collect(),
        }
    }

    #[test]
    fn logistic_values() {
        assert_eq!(logistic(0.0), 0.5);
        assert!((logistic(3f64.ln()) - 0.75).abs() < 1e-15);
        for eta in [-700.0, -30.0, -1.0, 2.5, 40.0, 700.0] {
            let s = logistic(eta) + logistic(-eta);
            assert!((s - 1.0).abs() < 1e-12);
            assert!(logistic(eta).is_finite());
        }
        assert!(logistic(-700.0) > 0.0 && logistic(700.0) <= 1.0);
    }

    #[test]
    fn posterior_at_zero_is_half_per_row() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let beta = BetaVector::zeros(5);
        let lp = log_unnormalized_posterior(&beta, &d, &prior).unwrap();
        let expected = 12.0 * 0.5f64.ln() + prior.log_density(&beta);
        assert!((lp - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_dataset_is_prior_only() {
        let d = parse_regional_csv("b,attack,x\n").unwrap();
        let prior = GaussianPrior::isotropic(1, 0.0, 2.0);
        let beta = BetaVector(vec![1.3]);
        let lp = log_unnormalized_posterior(&beta, &d, &prior).unwrap();
        assert_eq!(lp, prior.log_density(&beta));
    }

    #[test]
    fn posterior_dimension_checked() {
        let d = table1();
        let prior = GaussianPrior::isotropic(4, 0.0, 10.0);
        assert!(matches!(
            log_unnormalized_posterior(&BetaVector::zeros(4), &d, &prior),
            Err(LogitError::DimensionMismatch { .. })
        ));
    }

    /// Product-form evaluation: Π σ^y (1-σ)^(1-y) · Π N(β; m, s), then log.
    fn naive_log_posterior(beta: &[f64], data: &RegionalDataset, prior: &GaussianPrior) -> f64 {
        let mut prod = 1.0f64;
        for r in &data.rows {
            let eta: f64 = beta.iter().zip(r.z.values()).map(|(b, z)| b * z).sum();
            let p = 1.0 / (1.0 + (-eta).exp());
            prod *= if r.y { p } else { 1.0 - p };
        }
        for (i, b) in beta.iter().enumerate() {
            let s = prior.sd[i];
            let u = (b - prior.mean[i]) / s;
            prod *= (-0.5 * u * u).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        }
        prod.ln()
    }

    #[test]
    fn three_row_product_oracle() {
        let d = toy(&[(true, &[1.0, 0.5]), (false, &[1.0, -1.0]), (true, &[1.0, 2.0])]);
        let prior = GaussianPrior::isotropic(2, 0.0, 3.0);
        let beta = [0.3, -0.7];
        let lp = log_unnormalized_posterior(&BetaVector(beta.to_vec()), &d, &prior).unwrap();
        assert!((lp - naive_log_posterior(&beta, &d, &prior)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn posterior_matches_product_form(
            beta in proptest::collection::vec(-3.0f64..3.0, 3),
            rows in proptest::collection::vec((any::<bool>(), -2.0f64..2.0, -2.0f64..2.0), 1..6),
            sd in 0.5f64..5.0,
        ) {
            let rows: Vec<(bool, Vec<f64>)> = rows.into_iter().map(|(y, a, b)| (y, vec![1.0, a, b])).collect();
            let refs: Vec<(bool, &[f64])> = rows.iter().map(|(y, z)| (*y, z.as_slice())).collect();
            let d = toy(&refs);
            let prior = GaussianPrior::isotropic(3, 0.1, sd);
            let lp = log_unnormalized_posterior(&BetaVector(beta.clone()), &d, &prior).unwrap();
            prop_assert!((lp - naive_log_posterior(&beta, &d, &prior)).abs() < 1e-9);
        }

        #[test]
        fn logistic_monotone_and_symmetric(a in -700.0f64..700.0, d in 1e-6f64..10.0) {
            prop_assert!(logistic(a) <= logistic(a + d));
            prop_assert!((logistic(a) + logistic(-a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mle_table1() {
        let fit = fit_mle(&table1(), 100, 1e-10).unwrap();
        assert!(fit.diagnostics.gradient_max_norm <= 1e-10);
        let expected = [1.811, -1.817, 3.299, -4.402, 1.311];
        for (b, e) in fit.beta.0.iter().zip(expected) {
            assert!((b - e).abs() < 1e-3, "{b} vs {e}");
        }
        assert!(fit.diagnostics.hessian_condition.is_finite());
    }

    #[test]
    fn mle_intercept_only_is_logit_of_mean() {
        let rows: Vec<(bool, &[f64])> = (0..12).map(|i| (i < 3, &[1.0][..])).collect();
        let fit = fit_mle(&toy(&rows), 100, 1e-12).unwrap();
        assert!((fit.beta.0[0] - (0.25f64 / 0.75).ln()).abs() < 1e-9);
    }

    #[test]
    fn mle_detects_separation() {
        let d = toy(&[(false, &[1.0, 0.0]), (true, &[1.0, 1.0])]);
        assert!(matches!(
            fit_mle(&d, 200, 1e-8),
            Err(LogitError::PossibleSeparation { .. })
        ));
    }

    #[test]
    fn mle_detects_rank_deficiency() {
        let base = table1();
        let flags = vec![false; base.len()];
        let d = crate::ingest::expand_conditioning(&base, &flags).unwrap();
        assert_eq!(design_rank(&d), 5);
        assert_eq!(
            fit_mle(&d, 100, 1e-8),
            Err(LogitError::RankDeficient { rank: 5, dim: 6 })
        );
    }

    #[test]
    fn sampler_is_reproducible() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let cfg = SamplerConfig {
            iterations: 600,
            burn_in: 100,
            seed: 42,
        };
        let a = sample_posterior(&d, &prior, cfg).unwrap();
        let b = sample_posterior(&d, &prior, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        let c = sample_posterior(&d, &prior, SamplerConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn stored_log_posterior_matches_direct_evaluation() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let draws = sample_posterior(
            &d,
            &prior,
            SamplerConfig {
                iterations: 300,
                burn_in: 50,
                seed: 3,
            },
        )
        .unwrap();
        for draw in draws.draws.iter().step_by(17) {
            let direct = log_unnormalized_posterior(&draw.beta, &d, &prior).unwrap();
            assert!((direct - draw.log_posterior).abs() < 1e-8);
        }
    }

    #[test]
    fn sampler_rejects_bad_config() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let cfg = SamplerConfig {
            iterations: 100,
            burn_in: 100,
            seed: 1,
        };
        assert!(matches!(
            sample_posterior(&d, &prior, cfg),
            Err(LogitError::InvalidConfig(_))
        ));
    }

    #[test]
    fn empty_dataset_recovers_prior() {
        let d = parse_regional_csv("b,attack\n").unwrap();
        let d = with_intercept(&d).unwrap();
        let prior = GaussianPrior::isotropic(1, 0.0, 10.0);
        let draws = sample_posterior(
            &d,
            &prior,
            SamplerConfig {
                iterations: 21_000,
                burn_in: 1_000,
                seed: 11,
            },
        )
        .unwrap();
        let chain: Vec<f64> = draws.coordinate(0).collect();
        let ess = effective_sample_size(&chain);
        let mean = draws.means()[0];
        assert!(mean.abs() < 3.0 * 10.0 / ess.sqrt(), "mean {mean}, ess {ess}");
    }

    #[test]
    fn ess_of_independent_draws_is_near_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chain: Vec<f64> = (0..4000).map(|_| rng.sample(StandardNormal)).collect();
        let ess = effective_sample_size(&chain);
        assert!((3000.0..5200.0).contains(&ess), "{ess}");
        // AR(1) with phi = 0.9 has ESS ≈ n (1-phi)/(1+phi)
        let mut x = 0.0;
        let ar: Vec<f64> = (0..40_000)
            .map(|_| {
                x = 0.9 * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let ess = effective_sample_size(&ar);
        let expected = 40_000.0 * 0.1 / 1.9;
        assert!((ess / expected - 1.0).abs() < 0.3, "{ess} vs {expected}");
    }

    #[test]
    fn flat_prior_intercept_only_matches_mle() {
        let rows: Vec<(bool, &[f64])> = (0..1200).map(|i| (i % 4 == 0, &[1.0][..])).collect();
        let d = toy(&rows);
        let mle = fit_mle(&d, 100, 1e-10).unwrap().beta.0[0];
        let draws = sample_posterior(
            &d,
            &GaussianPrior::isotropic(1, 0.0, 1e3),
            SamplerConfig {
                iterations: 6_000,
                burn_in: 1_000,
                seed: 2,
            },
        )
        .unwrap();
        let chain: Vec<f64> = draws.coordinate(0).collect();
        let mean = draws.means()[0];
        let sd = (chain.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / chain.len() as f64).sqrt();
        let mc_error = sd / effective_sample_size(&chain).sqrt();
        assert!((mean - mle).abs() < 3.0 * mc_error + 2e-3, "{mean} vs {mle} (mc {mc_error})");
    }

    #[test]
    fn chains_concatenate_in_seed_order() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let all = sample_chains(&d, &prior, 300, 100, &[5, 6]).unwrap();
        let first = sample_posterior(
            &d,
            &prior,
            SamplerConfig {
                iterations: 300,
                burn_in: 100,
                seed: 5,
            },
        )
        .unwrap();
        assert_eq!(all.len(), 400);
        assert_eq!(&all.draws[..200], &first.draws[..]);
        assert_eq!(all.meta.seeds, vec![5, 6]);
    }

    #[test]
    fn draws_csv_layout() {
        let d = table1();
        let prior = GaussianPrior::isotropic(5, 0.0, 10.0);
        let draws = sample_posterior(
            &d,
            &prior,
            SamplerConfig {
                iterations: 20,
                burn_in: 10,
                seed: 1,
            },
        )
        .unwrap();
        let csv = draws.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "beta_0,beta_1,beta_2,beta_3,beta_4,log_post"
        );
        assert_eq!(lines.count(), 10);
    }
}
