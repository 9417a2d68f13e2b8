//! Side-by-side comparison of computed values with the published ones for
//! the bundled twelve-bridge example.

use serde::{Deserialize, Serialize};

use crate::decision::{recommend, DependencyModel, UtilitySpec};
use crate::fixtures::{figure1_network, new_bridge, scaled_marginals, table1};
use crate::fusion::{assess_link, HistoryLikelihood, IntegrationConfig, PriorSpec, StageSettings};
use crate::induced::InducedLikelihoodCurve;
use crate::ingest::CrossingHistory;
use crate::logit::{fit_mle, sample_chains, GaussianPrior, SamplerConfig};
use crate::netmodel::Route;
use crate::pipeline::{assess_record, prepare_dataset, PipelineError};

/// Published posterior means, intercept first. Printed without signs.
pub const PUBLISHED_BAYES: [f64; 5] = [0.635, 1.583, 3.584, 4.382, 1.579];
/// Published maximum likelihood estimates, printed without signs.
pub const PUBLISHED_MLE: [f64; 5] = [1.811, 1.817, 3.299, 4.402, 1.311];
pub const PUBLISHED_P_ATTACK: f64 = 0.306;
pub const PUBLISHED_UNNORMALIZED: (f64, f64, f64) = (0.129, 0.293, 0.422);
pub const PUBLISHED_SUCCESS: [f64; 3] = [0.444, 0.480, 0.441];
pub const PUBLISHED_UTILITY: [f64; 3] = [0.414, 0.430, 0.361];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// Deterministic; must match.
    Exact,
    /// Depends on unstated choices or sampling; reported, not required.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproRow {
    pub name: String,
    pub published: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub kind: RowKind,
    pub pass: bool,
}

impl ReproRow {
    fn new(name: impl Into<String>, published: f64, computed: f64, tolerance: f64, kind: RowKind) -> Self {
        Self {
            name: name.into(),
            published,
            computed,
            tolerance,
            kind,
            pass: (computed - published).abs() < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub rows: Vec<ReproRow>,
    pub notes: Vec<String>,
}

impl ReproReport {
    pub fn exact_rows_pass(&self) -> bool {
        self.rows.iter().filter(|r| r.kind == RowKind::Exact).all(|r| r.pass)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<34} {:>10} {:>10} {:>8} {:>6} {:>5}\n",
            "quantity", "published", "computed", "tol", "kind", "ok"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<34} {:>10.4} {:>10.4} {:>8.4} {:>6} {:>5}\n",
                r.name,
                r.published,
                r.computed,
                r.tolerance,
                match r.kind {
                    RowKind::Exact => "exact",
                    RowKind::Soft => "soft",
                },
                if r.pass { "yes" } else { "no" }
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Route probabilities and utilities with the calibrated marginals.
pub fn decision_rows() -> Vec<ReproRow> {
    let net = figure1_network();
    let m = scaled_marginals();
    let mut rows = Vec::new();
    let r = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 100.0 })
        .expect("bundled network evaluates");
    for (i, e) in r.per_route.iter().enumerate() {
        rows.push(ReproRow::new(format!("success {}", e.route), PUBLISHED_SUCCESS[i], e.p_success, 1e-3, RowKind::Exact));
        rows.push(ReproRow::new(format!("E[U] {} (x=100)", e.route), PUBLISHED_UTILITY[i], e.expected_utility, 1e-3, RowKind::Exact));
    }
    let best100 = r.recommended_route() == &Route::from_ids(&[1, 2, 3, 4, 10]);
    rows.push(ReproRow::new("argmax is (1,2,3,4,10) at x=100", 1.0, best100 as u8 as f64, 0.5, RowKind::Exact));
    let r10 = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 10.0 })
        .expect("bundled network evaluates");
    let best10 = r10.recommended_route() == &Route::from_ids(&[1, 2, 9]);
    rows.push(ReproRow::new("argmax is (1,2,9) at x=10", 1.0, best10 as u8 as f64, 0.5, RowKind::Exact));
    rows
}

/// Closed-form checks with a flat curve and uniform prior. The tolerance is
/// 1e-4 with fine integration and 2e-2 on the coarse grid.
pub fn oracle_rows(integration: &IntegrationConfig) -> Vec<ReproRow> {
    // the coarse grid is a Riemann sum that skips p = 0, so its rows are approximate
    let (tol, kind) = match integration {
        IntegrationConfig::PaperGrid => (2e-2, RowKind::Soft),
        IntegrationConfig::Fine { .. } => (1e-4, RowKind::Exact),
    };
    let flat = InducedLikelihoodCurve::flat();
    let run = |n: usize, lk: HistoryLikelihood| {
        assess_link(&CrossingHistory::clear_run(n), &flat, &PriorSpec::Uniform, &lk, integration)
            .expect("flat curve integrates")
            .p_attack
    };
    let mut rows = vec![ReproRow::new(
        "flat curve, 4 clear, adversarial",
        1.0 / (2.0 + 2f64.sqrt()),
        run(4, HistoryLikelihood::adversarial()),
        tol,
        kind,
    )];
    for n in [1, 2, 4] {
        rows.push(ReproRow::new(
            format!("flat curve, {n} clear, conventional"),
            1.0 / (n as f64 + 2.0),
            run(n, HistoryLikelihood::conventional()),
            tol,
            kind,
        ));
    }
    rows
}

/// MLE magnitudes against the published row, plus the gradient at the fit.
pub fn mle_rows() -> Result<Vec<ReproRow>, PipelineError> {
    let data = prepare_dataset(&table1())?;
    let fit = fit_mle(&data, 100, 1e-10)?;
    let mut rows: Vec<ReproRow> = fit
        .beta
        .0
        .iter()
        .zip(PUBLISHED_MLE)
        .enumerate()
        .map(|(j, (b, p))| ReproRow::new(format!("|MLE beta_{j}|"), p, b.abs(), 0.2, RowKind::Soft))
        .collect();
    rows.push(ReproRow::new(
        "MLE gradient max-norm",
        0.0,
        fit.diagnostics.gradient_max_norm,
        1e-8,
        RowKind::Exact,
    ));
    Ok(rows)
}

/// Posterior mean magnitudes pooled over `seeds` against the published row.
pub fn bayes_rows(seeds: &[u64], settings: &StageSettings) -> Result<Vec<ReproRow>, PipelineError> {
    let data = prepare_dataset(&table1())?;
    let prior = GaussianPrior::isotropic(data.dim(), 0.0, settings.prior_sd);
    let draws = sample_chains(
        &data,
        &prior,
        settings.sampler.iterations,
        settings.sampler.burn_in,
        seeds,
    )?;
    Ok(draws
        .means()
        .iter()
        .zip(PUBLISHED_BAYES)
        .enumerate()
        .map(|(j, (m, p))| ReproRow::new(format!("|posterior mean beta_{j}|"), p, m.abs(), 0.5, RowKind::Soft))
        .collect())
}

/// New-bridge assessment on the coarse grid for one seed.
pub fn end_to_end_rows(seed: u64) -> Result<Vec<ReproRow>, PipelineError> {
    end_to_end_rows_with(&StageSettings::paper_compat(seed))
}

/// New-bridge assessment rows under arbitrary settings, labelled by the sampler seed.
pub fn end_to_end_rows_with(settings: &StageSettings) -> Result<Vec<ReproRow>, PipelineError> {
    let seed = settings.sampler.seed;
    let run = assess_record(&table1(), &new_bridge(), settings)?;
    let a = run.assessment;
    let (pa, pc, pn) = PUBLISHED_UNNORMALIZED;
    Ok(vec![
        ReproRow::new(format!("P(attack) seed {seed}"), PUBLISHED_P_ATTACK, a.p_attack, 0.10, RowKind::Soft),
        // the published unnormalized values depend on an unstated density scale
        ReproRow::new(format!("unnormalized attack seed {seed}"), pa, a.unnormalized_attack, f64::INFINITY, RowKind::Soft),
        ReproRow::new(format!("unnormalized clear seed {seed}"), pc, a.unnormalized_clear, f64::INFINITY, RowKind::Soft),
        ReproRow::new(format!("normalizing constant seed {seed}"), pn, a.normalizing_constant, f64::INFINITY, RowKind::Soft),
    ])
}

pub fn full_report(seeds: &[u64], oracle_integration: &IntegrationConfig) -> Result<ReproReport, PipelineError> {
    let sweeps = SamplerConfig::default();
    report(seeds, sweeps.iterations, sweeps.burn_in, oracle_integration)
}

/// [`full_report`] with a chosen number of MCMC sweeps per chain.
pub fn report(
    seeds: &[u64],
    iterations: usize,
    burn_in: usize,
    oracle_integration: &IntegrationConfig,
) -> Result<ReproReport, PipelineError> {
    let mut rows = decision_rows();
    rows.extend(oracle_rows(oracle_integration));
    rows.extend(mle_rows()?);
    let bayes = StageSettings {
        sampler: SamplerConfig { iterations, burn_in, seed: 0 },
        ..StageSettings::default()
    };
    rows.extend(bayes_rows(seeds, &bayes)?);
    for &seed in seeds {
        let mut s = StageSettings::paper_compat(seed);
        s.sampler.iterations = iterations;
        s.sampler.burn_in = burn_in;
        rows.extend(end_to_end_rows_with(&s)?);
    }
    let notes = vec![
        "published coefficient rows omit signs; magnitudes are compared".into(),
        "unnormalized integrals scale with the curve normalization and are listed for reference only".into(),
        "curve construction (sample selection, smoothing at the ends, grid weights) is not fully pinned down by the source, so end-to-end rows are soft".into(),
    ];
    Ok(ReproReport { rows, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_rows_all_pass() {
        let rows = decision_rows();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.pass), "{rows:#?}");
    }

    #[test]
    fn oracle_rows_pass_in_fine_mode() {
        assert!(oracle_rows(&IntegrationConfig::Fine { step: 0.001 }).iter().all(|r| r.pass));
        let coarse = oracle_rows(&IntegrationConfig::PaperGrid);
        // the coarse grid drifts past 2e-2 for longer conventional runs
        assert!(coarse[0].pass && coarse[1].pass && coarse[2].pass);
        assert!(!coarse[3].pass);
    }

    #[test]
    fn short_report_has_every_section() {
        let r = report(&[1, 2], 600, 100, &IntegrationConfig::PaperGrid).unwrap();
        assert_eq!(r.rows.len(), 8 + 4 + 6 + 5 + 2 * 4);
        assert!(r.exact_rows_pass());
        assert!(r.rows.iter().any(|row| row.name == "P(attack) seed 2"));
        assert!(r.to_table().contains("note:"));
    }

    #[test]
    fn mle_gradient_row_passes() {
        let rows = mle_rows().unwrap();
        assert!(rows.last().unwrap().pass);
        assert!(rows.iter().all(|r| r.pass));
    }
}
