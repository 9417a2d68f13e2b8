//! Regional data and one link record in, link assessment out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{assess_link, FusionError, LinkAssessment, StageSettings};
use crate::induced::{induce_curve, CurveError, InducedLikelihoodCurve};
use crate::ingest::{with_intercept, IngestError, LinkRecord, RegionalDataset};
use crate::logit::{sample_posterior, GaussianPrior, LogitError, PosteriorDraws, SamplerMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Logit(#[from] LogitError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub sampler: SamplerMeta,
    pub posterior_means: Vec<f64>,
    pub curve: InducedLikelihoodCurve,
    pub assessment: LinkAssessment,
}

/// Adds the intercept column unless it is already there.
pub fn prepare_dataset(data: &RegionalDataset) -> Result<RegionalDataset, PipelineError> {
    if data.has_intercept() {
        Ok(data.clone())
    } else {
        Ok(with_intercept(data)?)
    }
}

/// Stage I: posterior draws of the regional logistic coefficients.
/// `data` must already carry its intercept column.
pub fn sample_stage1(
    data: &RegionalDataset,
    settings: &StageSettings,
) -> Result<PosteriorDraws, PipelineError> {
    let prior = GaussianPrior::isotropic(data.dim(), 0.0, settings.prior_sd);
    Ok(sample_posterior(data, &prior, settings.sampler)?)
}

/// Stage II and fusion from existing draws.
pub fn assess_from_draws(
    draws: &PosteriorDraws,
    data: &RegionalDataset,
    record: &LinkRecord,
    settings: &StageSettings,
) -> Result<PipelineRun, PipelineError> {
    let z = record.covariate_vector(data)?;
    let curve = induce_curve(draws, &z, &settings.curve)?;
    let assessment = assess_link(
        &record.history,
        &curve,
        &settings.prior,
        &settings.likelihood,
        &settings.integration,
    )?
    .for_link(record.link.clone());
    Ok(PipelineRun {
        sampler: draws.meta.clone(),
        posterior_means: draws.means(),
        curve,
        assessment,
    })
}

/// Both stages end to end. The intercept column is added when missing.
pub fn assess_record(
    data: &RegionalDataset,
    record: &LinkRecord,
    settings: &StageSettings,
) -> Result<PipelineRun, PipelineError> {
    let data = prepare_dataset(data)?;
    // reject bad covariates before the sampler runs
    record.covariate_vector(&data)?;
    let draws = sample_stage1(&data, settings)?;
    assess_from_draws(&draws, &data, record, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{new_bridge, table1};
    use crate::logit::SamplerConfig;

    #[test]
    fn short_run_produces_a_probability() {
        let mut settings = StageSettings::paper_compat(3);
        settings.sampler = SamplerConfig { iterations: 1500, burn_in: 500, seed: 3 };
        let run = assess_record(&table1(), &new_bridge(), &settings).unwrap();
        let a = &run.assessment;
        assert!(a.p_attack > 0.0 && a.p_attack < 1.0);
        assert_eq!(a.link.as_ref().unwrap().as_str(), "9");
        assert_eq!(run.curve.points().len(), 60);
        assert_eq!(run.posterior_means.len(), 5);
        let again = assess_record(&table1(), &new_bridge(), &settings).unwrap();
        assert_eq!(again, run);
    }

    #[test]
    fn record_with_unknown_covariate_fails() {
        let mut rec = new_bridge();
        rec.covariates.insert("harbour".into(), 2.0);
        let data = prepare_dataset(&table1()).unwrap();
        assert!(matches!(
            rec.covariate_vector(&data),
            Err(IngestError::UnknownCovariate(_))
        ));
        // fails before sampling, so even an absurd sweep count returns at once
        let mut settings = StageSettings::default();
        settings.sampler.iterations = usize::MAX;
        assert!(matches!(
            assess_record(&table1(), &rec, &settings),
            Err(PipelineError::Ingest(IngestError::UnknownCovariate(_)))
        ));
    }
}
