use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use routerisk_core::decision::recommend;
use routerisk_core::fusion::{assess_link, HistoryLikelihood, IntegrationConfig, LinkAssessment};
use routerisk_core::induced::InducedLikelihoodCurve;
use routerisk_core::logit::{fit_mle, MleFit, SamplerMeta};
use routerisk_core::pipeline::{assess_record, prepare_dataset, sample_stage1};
use routerisk_core::reproduce::report;
use routerisk_core::sequential::{PocMode, PocSettings, PocWeights, ReweightScope, SequentialSession};
use routerisk_core::fusion::StageSettings;

use crate::args::*;
use crate::error::CliError;
use crate::inputs::*;
use crate::walk::run_walk;

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Pipeline(e.to_string()))?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct FitSummary {
    covariates: Vec<String>,
    rows: usize,
    positives: usize,
    mle: Option<MleFit>,
    mle_error: Option<String>,
    posterior_means: Vec<f64>,
    posterior_skewness: Vec<f64>,
    prior_sd: f64,
    sampler: SamplerMeta,
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let data = prepare_dataset(&load_dataset(&args.data)?)?;
    let settings = StageSettings {
        prior_sd: args.sampler.prior_sd,
        sampler: sampler_config(&args.sampler)?,
        ..StageSettings::default()
    };
    let (mle, mle_error) = match fit_mle(&data, 100, 1e-10) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let draws = sample_stage1(&data, &settings)?;
    let summary = FitSummary {
        covariates: data.covariate_names.clone(),
        rows: data.len(),
        positives: data.positives(),
        mle,
        mle_error,
        posterior_means: draws.means(),
        posterior_skewness: draws.skewness(),
        prior_sd: settings.prior_sd,
        sampler: draws.meta.clone(),
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::user(format!("{}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Pipeline(e.to_string()))?;
        write_file(&dir.join("fit.json"), &json)?;
        write_file(&dir.join("draws.csv"), &draws.to_csv())?;
    }
    if args.json {
        return print_json(&summary);
    }
    println!(
        "{} rows, {} incidents; {} sweeps, {} burn-in, seed {}, acceptance {:.3}",
        summary.rows,
        summary.positives,
        summary.sampler.iterations,
        summary.sampler.burn_in,
        args.sampler.seed,
        summary.sampler.acceptance_rate
    );
    println!("{:<16} {:>10} {:>10} {:>10}", "coefficient", "MLE", "Bayes", "skew");
    for (j, name) in summary.covariates.iter().enumerate() {
        let mle = summary
            .mle
            .as_ref()
            .map_or("-".to_string(), |f| format!("{:.3}", f.beta.0[j]));
        println!(
            "{:<16} {:>10} {:>10.3} {:>10.3}",
            name, mle, summary.posterior_means[j], summary.posterior_skewness[j]
        );
    }
    if let Some(e) = &summary.mle_error {
        println!("MLE unavailable: {e}");
    }
    Ok(())
}

#[derive(Serialize)]
struct AssessOutput {
    assessment: LinkAssessment,
    posterior_means: Option<Vec<f64>>,
    sampler: Option<SamplerMeta>,
}

pub fn assess(args: AssessArgs) -> Result<(), CliError> {
    let mut record = load_record(args.record.as_deref())?;
    if let Some(h) = &args.history {
        record.history = parse_history(h)?;
    }
    let mut settings = stage_settings(&args.sampler, &args.curve)?;
    settings.prior = parse_prior(&args.prior)?;
    settings.likelihood = match args.likelihood {
        LikelihoodArg::Adversarial => HistoryLikelihood::adversarial(),
        LikelihoodArg::Conventional => HistoryLikelihood::conventional(),
    };
    let (output, curve) = if args.flat_curve {
        let curve = InducedLikelihoodCurve::flat();
        let assessment = assess_link(&record.history, &curve, &settings.prior, &settings.likelihood, &settings.integration)
            .map_err(|e| CliError::Pipeline(e.to_string()))?
            .for_link(record.link.clone());
        (
            AssessOutput {
                assessment,
                posterior_means: None,
                sampler: None,
            },
            curve,
        )
    } else {
        let data = load_dataset(&args.data)?;
        let run = assess_record(&data, &record, &settings)?;
        (
            AssessOutput {
                assessment: run.assessment,
                posterior_means: Some(run.posterior_means),
                sampler: Some(run.sampler),
            },
            run.curve,
        )
    };
    if let Some(path) = &args.curve_csv {
        write_file(path, &curve.to_csv())?;
    }
    if args.json {
        return print_json(&output);
    }
    print!("{}", output.assessment.to_record());
    if let Some(means) = &output.posterior_means {
        let means: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
        println!("posterior_means: {}", means.join(" "));
    }
    Ok(())
}

pub fn plan(args: PlanArgs) -> Result<(), CliError> {
    let inputs = plan_inputs(&args.input)?;
    let decision = recommend(&inputs.network, &inputs.marginals, &inputs.model, &inputs.utility)?;
    if args.json {
        return print_json(&decision);
    }
    print!("{}", decision.to_table());
    println!("recommended: {}", decision.recommended_route());
    if decision.tie_broken {
        println!("(tie broken by route order)");
    }
    Ok(())
}

pub fn walk(args: WalkArgs) -> Result<(), CliError> {
    let inputs = plan_inputs(&args.input)?;
    let poc = PocSettings {
        mode: match args.poc {
            PocArg::Upheld => PocMode::Upheld,
            PocArg::Rejected => PocMode::Rejected,
        },
        weights: PocWeights {
            w_clear: args.w_clear,
            w_incident: args.w_incident,
        },
        scope: match args.scope {
            ScopeArg::Adjacent => ReweightScope::Adjacent,
            ScopeArg::Downstream => ReweightScope::Downstream,
        },
    };
    let session = SequentialSession::start("walk", inputs.network, inputs.marginals, inputs.model, inputs.utility, poc)?;
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let done = run_walk(session, stdin.lock(), &mut stdout.lock(), &mut stderr.lock())?;
    if let Some(path) = &args.transcript {
        let json = serde_json::to_string_pretty(&done).map_err(|e| CliError::Pipeline(e.to_string()))?;
        write_file(path, &json)?;
    }
    Ok(())
}

pub fn reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    if args.chains == 0 {
        return Err(CliError::user("--chains must be at least 1"));
    }
    if args.iterations <= args.burn_in {
        return Err(CliError::user(format!(
            "--iterations ({}) must exceed --burn-in ({})",
            args.iterations, args.burn_in
        )));
    }
    let seeds: Vec<u64> = (args.seed..args.seed + args.chains).collect();
    let oracle = if args.fine_integration {
        IntegrationConfig::default()
    } else {
        IntegrationConfig::PaperGrid
    };
    let r = report(&seeds, args.iterations, args.burn_in, &oracle)?;
    if args.json {
        print_json(&r)?;
    } else {
        print!("{}", r.to_table());
        io::stdout().flush()?;
    }
    if r.exact_rows_pass() {
        Ok(())
    } else {
        Err(CliError::Pipeline("deterministic rows disagree with the published values".into()))
    }
}

pub fn serve(args: ServeArgs) -> Result<(), CliError> {
    let state = routerisk_service::AppState::open(&args.sessions)
        .map_err(|e| CliError::user(format!("{}: {e}", args.sessions.display())))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .map_err(|e| CliError::user(format!("{}: {e}", args.addr)))?;
        eprintln!("listening on {}", listener.local_addr()?);
        routerisk_service::serve(listener, Arc::new(state)).await?;
        Ok(())
    })
}
