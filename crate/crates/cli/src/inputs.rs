//! Loading files and parsing flag values.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use routerisk_core::decision::{scale_link_probabilities, DependencyModel, LinkProbabilities, UtilitySpec};
use routerisk_core::fixtures::{figure1_network, new_bridge, scaled_marginals, table1};
use routerisk_core::fusion::{IntegrationConfig, PriorSpec, StageSettings};
use routerisk_core::induced::{CurveSampling, InducedCurveConfig};
use routerisk_core::ingest::{parse_link_records, parse_regional_csv, CrossingHistory, LinkRecord, RegionalDataset};
use routerisk_core::logit::SamplerConfig;
use routerisk_core::netmodel::{LinkId, Network};

use crate::args::{CurveArgs, DataArgs, GridArg, PlanInputArgs, SamplerArgs};
use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

pub fn load_dataset(args: &DataArgs) -> Result<RegionalDataset, CliError> {
    match &args.data {
        None => Ok(table1()),
        Some(path) => parse_regional_csv(&read_text(path)?).map_err(|e| CliError::user(format!("{}: {e}", path.display()))),
    }
}

pub fn load_record(path: Option<&Path>) -> Result<LinkRecord, CliError> {
    let Some(path) = path else { return Ok(new_bridge()) };
    let mut records = parse_link_records(&read_text(path)?).map_err(|e| CliError::user(format!("{}: {e}", path.display())))?;
    match records.len() {
        1 => Ok(records.remove(0)),
        n => Err(CliError::user(format!("{}: expected one link record, found {n}", path.display()))),
    }
}

/// `0010`, `0,0,1,0` or empty.
pub fn parse_history(text: &str) -> Result<CrossingHistory, CliError> {
    let bits: Vec<u8> = text
        .chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(CliError::user(format!("history may only contain 0 and 1, found {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    CrossingHistory::from_bits(&bits).map_err(|e| CliError::user(e.to_string()))
}

/// `uniform` or `beta:A,B`.
pub fn parse_prior(text: &str) -> Result<PriorSpec, CliError> {
    let bad = || CliError::user(format!("prior must be `uniform` or `beta:A,B`, got {text:?}"));
    let prior = if text == "uniform" {
        PriorSpec::Uniform
    } else {
        let (a, b) = text.strip_prefix("beta:").and_then(|r| r.split_once(',')).ok_or_else(bad)?;
        PriorSpec::Beta {
            a: a.trim().parse().map_err(|_| bad())?,
            b: b.trim().parse().map_err(|_| bad())?,
        }
    };
    prior.validate().map_err(|e| CliError::user(e.to_string()))?;
    Ok(prior)
}

pub fn parse_samples(text: &str) -> Result<CurveSampling, CliError> {
    if text == "all" {
        return Ok(CurveSampling::AllDraws);
    }
    text.parse()
        .map(CurveSampling::Subsample)
        .map_err(|_| CliError::user(format!("--samples takes a count or `all`, got {text:?}")))
}

pub fn sampler_config(args: &SamplerArgs) -> Result<SamplerConfig, CliError> {
    if args.iterations <= args.burn_in {
        return Err(CliError::user(format!(
            "--iterations ({}) must exceed --burn-in ({})",
            args.iterations, args.burn_in
        )));
    }
    if !(args.prior_sd > 0.0 && args.prior_sd.is_finite()) {
        return Err(CliError::user(format!("--prior-sd must be positive, got {}", args.prior_sd)));
    }
    Ok(SamplerConfig {
        iterations: args.iterations,
        burn_in: args.burn_in,
        seed: args.seed,
    })
}

/// Stage settings from the sampler and curve flags. `--paper-compat` picks
/// the coarse grid unless `--grid` says otherwise.
pub fn stage_settings(sampler: &SamplerArgs, curve: &CurveArgs) -> Result<StageSettings, CliError> {
    let sampler_cfg = sampler_config(sampler)?;
    let grid = curve
        .grid
        .unwrap_or(if curve.paper_compat { GridArg::Paper } else { GridArg::Fine });
    Ok(StageSettings {
        prior_sd: sampler.prior_sd,
        sampler: sampler_cfg,
        curve: InducedCurveConfig {
            sampling: parse_samples(&curve.samples)?,
            smoothing_window: curve.window,
            seed: sampler.seed,
        },
        integration: match grid {
            GridArg::Paper => IntegrationConfig::PaperGrid,
            GridArg::Fine => IntegrationConfig::default(),
        },
        ..StageSettings::default()
    })
}

pub struct PlanInputs {
    pub network: Network,
    pub marginals: LinkProbabilities,
    pub model: DependencyModel,
    pub utility: UtilitySpec,
}

pub fn plan_inputs(args: &PlanInputArgs) -> Result<PlanInputs, CliError> {
    let network = match &args.network {
        Some(path) => Network::from_json(&read_text(path)?).map_err(|e| CliError::user(format!("{}: {e}", path.display())))?,
        None => figure1_network(),
    };
    network.ensure_valid().map_err(|e| CliError::user(e.to_string()))?;
    let marginals = match (&args.marginals, &args.calibrate) {
        (Some(path), _) => read_json::<LinkProbabilities>(path)?,
        (None, Some(spec)) => {
            let (link, p) = spec
                .split_once('=')
                .ok_or_else(|| CliError::user(format!("--calibrate takes LINK=P, got {spec:?}")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| CliError::user(format!("--calibrate probability {p:?} is not a number")))?;
            scale_link_probabilities(&network, &LinkId::new(link.trim()), p, args.round)?
        }
        (None, None) if args.network.is_none() => scaled_marginals(),
        (None, None) => return Err(CliError::user("give --marginals or --calibrate for a custom network")),
    };
    for id in marginals.0.keys() {
        if network.link(id).is_none() {
            return Err(CliError::user(format!("marginals name link {id}, which is not in the network")));
        }
    }
    marginals.check_covers(&network)?;
    let model = match &args.model {
        Some(path) => read_json(path)?,
        None => DependencyModel::Independent,
    };
    let utility = match args.x_util {
        Some(x_util) => UtilitySpec::LengthPenalty { x_util },
        None => UtilitySpec::Binary,
    };
    Ok(PlanInputs {
        network,
        marginals,
        model,
        utility,
    })
}
