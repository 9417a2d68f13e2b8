//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fail.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use routerisk_core::adversary::adversarial_clear_exponent;
use routerisk_core::decision::{
    recommend, route_failure_inclusion_exclusion, route_success_independent, DependencyModel,
    LinkProbabilities, UtilitySpec,
};
use routerisk_core::fixtures::{figure1_network, new_bridge, scaled_marginals, table1};
use routerisk_core::fusion::{assess_link, HistoryLikelihood, IntegrationConfig, PriorSpec, StageSettings};
use routerisk_core::induced::{
    induce_curve, moving_average, CurveSampling, InducedCurveConfig, InducedLikelihoodCurve,
};
use routerisk_core::ingest::{parse_regional_csv, with_intercept, CrossingHistory};
use routerisk_core::logit::{
    effective_sample_size, fit_mle, sample_posterior, Draw, GaussianPrior, PosteriorDraws,
    SamplerConfig, SamplerMeta, BetaVector,
};
use routerisk_core::netmodel::{enumerate_routes, Link, LinkId, Network, Route};
use routerisk_core::pipeline::{assess_record, prepare_dataset};
use routerisk_core::sequential::{
    sequential_update, Observation, Outcome, PocMode, PocSettings, PocWeights, ReweightScope,
    SequentialSession,
};

const PUBLISHED_MLE: [f64; 5] = [1.811, 1.817, 3.299, 4.402, 1.311];
const PUBLISHED_BAYES: [f64; 5] = [0.635, 1.583, 3.584, 4.382, 1.579];

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "{} {name} [{:.2}s / {:.0}s budget]{} {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { " over budget" },
        out.detail
    );
    pass
}

fn decision_reproduction() -> Verdict {
    let net = figure1_network();
    let m = scaled_marginals();
    let expected_marginals: LinkProbabilities = [
        (1, 0.20), (2, 0.20), (3, 0.06), (4, 0.06), (5, 0.06), (6, 0.06), (7, 0.06), (8, 0.06), (9, 0.306), (10, 0.15),
    ]
    .iter()
    .map(|&(l, p)| (LinkId::from(l), p))
    .collect();
    let mut pass = m == expected_marginals;
    let r = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 100.0 }).unwrap();
    let by_route = |ids: &[u32]| {
        r.per_route
            .iter()
            .find(|e| e.route == Route::from_ids(ids))
            .expect("route enumerated")
    };
    let mut detail = String::new();
    for (ids, s, u) in [
        (&[1, 2, 9][..], 0.444, 0.414),
        (&[1, 2, 3, 4, 5, 6, 7, 8][..], 0.441, 0.361),
        (&[1, 2, 3, 4, 10][..], 0.480, 0.430),
    ] {
        let e = by_route(ids);
        pass &= (e.p_success - s).abs() < 1e-3 && (e.expected_utility - u).abs() < 1e-3;
        detail.push_str(&format!("{}: S={:.5} EU={:.5}; ", e.route, e.p_success, e.expected_utility));
    }
    pass &= r.recommended_route() == &Route::from_ids(&[1, 2, 3, 4, 10]);
    let r10 = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 10.0 }).unwrap();
    pass &= r10.recommended_route() == &Route::from_ids(&[1, 2, 9]);
    detail.push_str(&format!(
        "argmax x=100 {}, x=10 {}",
        r.recommended_route(),
        r10.recommended_route()
    ));
    Verdict { pass, detail }
}

fn closed_form_fusion() -> Verdict {
    let flat = InducedLikelihoodCurve::flat();
    let fine = IntegrationConfig::Fine { step: 0.001 };
    let beta = statrs::function::beta::beta;
    let r = 2f64.sqrt();
    let oracle = beta(2.0, r + 1.0) / (beta(2.0, r + 1.0) + beta(1.0, r + 2.0));
    let a = assess_link(&CrossingHistory::clear_run(4), &flat, &PriorSpec::Uniform, &HistoryLikelihood::adversarial(), &fine).unwrap();
    let mut worst = (a.p_attack - oracle).abs();
    let mut pass = worst < 1e-4 && (oracle - 1.0 / (2.0 + r)).abs() < 1e-12;
    for n in 1..=10usize {
        // conventional n-zero history: B(2, n+1) / (B(2, n+1) + B(1, n+2))
        let o = beta(2.0, n as f64 + 1.0) / (beta(2.0, n as f64 + 1.0) + beta(1.0, n as f64 + 2.0));
        let a = assess_link(&CrossingHistory::clear_run(n), &flat, &PriorSpec::Uniform, &HistoryLikelihood::conventional(), &fine).unwrap();
        let err = (a.p_attack - o).abs();
        pass &= err < 1e-4 && (o - 1.0 / (n as f64 + 2.0)).abs() < 1e-12;
        worst = worst.max(err);
    }
    Verdict {
        pass,
        detail: format!("4-zero adversarial -> {:.6} (oracle {:.6}); worst abs error {:.2e}", a.p_attack, oracle, worst),
    }
}

/// Connected random graph on `n` nodes; node 0 is the source, `n-1` the sink.
fn random_network(rng: &mut ChaCha8Rng) -> Network {
    let n = rng.random_range(2..=7usize);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut pairs = BTreeSet::new();
    // spanning path keeps the sink reachable
    let mut order: Vec<usize> = (1..n - 1).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut chain = vec![0];
    chain.extend(order);
    chain.push(n - 1);
    for w in chain.windows(2) {
        pairs.insert((w[0].min(w[1]), w[0].max(w[1])));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.35) {
                pairs.insert((a, b));
            }
        }
    }
    let links = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| Link {
            id: LinkId::from(i as u32 + 1),
            a: nodes[a].clone(),
            b: nodes[b].clone(),
            length_ratio: 1.0,
        })
        .collect();
    Network { source: nodes[0].clone(), sink: nodes[n - 1].clone(), nodes, links }
}

fn brute_force_failure(ps: &[f64]) -> f64 {
    (1u32..(1 << ps.len()))
        .map(|outcome| {
            ps.iter()
                .enumerate()
                .map(|(i, p)| if outcome >> i & 1 == 1 { *p } else { 1.0 - p })
                .product::<f64>()
        })
        .sum()
}

fn brute_force_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    while cases < 1000 {
        let net = random_network(&mut rng);
        let routes: Vec<Route> = enumerate_routes(&net).unwrap().into_iter().filter(|r| r.len() <= 6).collect();
        if routes.is_empty() {
            continue;
        }
        let m: LinkProbabilities = net.links.iter().map(|l| (l.id.clone(), rng.random::<f64>())).collect();
        let route = &routes[rng.random_range(0..routes.len())];
        let ps: Vec<f64> = route.links.iter().map(|l| m.get(l).unwrap()).collect();
        let ie = route_failure_inclusion_exclusion(route, &m, &DependencyModel::Independent).unwrap();
        let prod = 1.0 - route_success_independent(route, &m).unwrap();
        let brute = brute_force_failure(&ps);
        worst = worst.max((ie - prod).abs()).max((ie - brute).abs());
        cases += 1;
    }
    Verdict {
        pass: worst < 1e-12,
        detail: format!("{cases} cases, worst disagreement {worst:.2e}"),
    }
}

fn mle_reproduction() -> Verdict {
    let data = prepare_dataset(&table1()).unwrap();
    let fit = fit_mle(&data, 100, 1e-10).unwrap();
    let g = fit.diagnostics.gradient_max_norm;
    let signed_dev: Vec<String> = fit
        .beta
        .0
        .iter()
        .zip(PUBLISHED_MLE)
        .map(|(b, p)| format!("{:+.3}", b - p))
        .collect();
    let magnitude_ok = fit.beta.0.iter().zip(PUBLISHED_MLE).all(|(b, p)| (b.abs() - p).abs() <= 0.2);
    Verdict {
        pass: g <= 1e-8 && magnitude_ok,
        detail: format!(
            "gradient {g:.1e}; beta {:?}; |beta| within 0.2: {magnitude_ok}; signed deviation from printed row [{}] (printed row omits the minus signs of beta_1, beta_3)",
            fit.beta.0.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>(),
            signed_dev.join(", ")
        ),
    }
}

fn bayes_reproduction() -> Verdict {
    let data = prepare_dataset(&table1()).unwrap();
    let prior = GaussianPrior::isotropic(data.dim(), 0.0, 10.0);
    let seeds = [1u64, 2, 3];
    let runs: Vec<PosteriorDraws> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let (data, prior) = (&data, &prior);
                s.spawn(move || sample_posterior(data, prior, SamplerConfig { iterations: 11_000, burn_in: 1_000, seed }).unwrap())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut means_ok = true;
    let mut neg_skew = 0;
    let mut detail = String::new();
    for (seed, d) in seeds.iter().zip(&runs) {
        let means = d.means();
        let skew = d.skewness();
        let ok = means.iter().zip(PUBLISHED_BAYES).all(|(m, p)| (m.abs() - p).abs() <= 0.5);
        means_ok &= ok;
        if skew[1] < 0.0 && skew[3] < 0.0 {
            neg_skew += 1;
        }
        detail.push_str(&format!(
            "seed {seed}: means [{}] skew(b1,b3)=({:.2},{:.2}) within 0.5: {ok}; ",
            means.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>().join(", "),
            skew[1],
            skew[3]
        ));
    }
    detail.push_str(&format!("negative skew in {neg_skew}/3 seeds"));
    if !means_ok {
        detail.push_str("; the published row is not reproducible with N(0,10^2) priors (it matches a prior sd near 5.5)");
    }
    Verdict { pass: means_ok && neg_skew >= 2, detail }
}

fn end_to_end() -> Verdict {
    let seeds = [1u64, 2, 3, 4, 5];
    let runs: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| s.spawn(move || assess_record(&table1(), &new_bridge(), &StageSettings::paper_compat(seed)).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut pass = true;
    let mut detail = String::new();
    for (seed, run) in seeds.iter().zip(&runs) {
        let a = &run.assessment;
        pass &= (a.p_attack - 0.306).abs() <= 0.10;
        detail.push_str(&format!(
            "seed {seed}: pAttack={:.4} (attack {:.4}, clear {:.4}, constant {:.4}); ",
            a.p_attack, a.unnormalized_attack, a.unnormalized_clear, a.normalizing_constant
        ));
    }
    if !pass {
        detail.push_str("band missed: the induced-likelihood construction is under-specified (sample selection, end smoothing, density normalization)");
    }
    Verdict { pass, detail }
}

fn property_suites() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();

    // likelihood envelope
    let cap = 3f64.powf(1.0 / 3.0);
    if !(1..=5000).all(|n| adversarial_clear_exponent(&CrossingHistory::clear_run(n)) <= cap + 1e-15) {
        failures.push("envelope");
    }

    // proportionality invariance of pAttack
    let fine = IntegrationConfig::Fine { step: 0.01 };
    for _ in 0..200 {
        let bits: Vec<bool> = (0..rng.random_range(0..8)).map(|_| rng.random_bool(0.3)).collect();
        let h = CrossingHistory::new(bits);
        let prior = PriorSpec::Beta { a: rng.random_range(0.5..4.0), b: rng.random_range(0.5..4.0) };
        let base = assess_link(&h, &InducedLikelihoodCurve::flat(), &prior, &HistoryLikelihood::adversarial(), &fine).unwrap();
        let mut scaled = HistoryLikelihood::adversarial();
        scaled.scale = rng.random_range(0.01..100.0);
        let s = assess_link(&h, &InducedLikelihoodCurve::flat(), &prior, &scaled, &fine).unwrap();
        if (s.p_attack - base.p_attack).abs() > 1e-12 {
            failures.push("proportionality");
            break;
        }
    }

    // POC equal-weight no-op
    for _ in 0..20 {
        let w = rng.random_range(0.05..20.0);
        let poc = PocSettings {
            mode: PocMode::Rejected,
            weights: PocWeights { w_clear: w, w_incident: w },
            scope: if rng.random_bool(0.5) { ReweightScope::Adjacent } else { ReweightScope::Downstream },
        };
        let s0 = SequentialSession::start("a", figure1_network(), scaled_marginals(), DependencyModel::Independent, UtilitySpec::LengthPenalty { x_util: 100.0 }, poc).unwrap();
        let outcome = if rng.random_bool(0.5) { Outcome::Incident } else { Outcome::Clear };
        let s1 = sequential_update(&s0, &Observation { link: LinkId::from(1), outcome, weights: None }).unwrap();
        let s2 = sequential_update(&s1, &Observation { link: LinkId::from(2), outcome, weights: None }).unwrap();
        if s2.marginals.iter().any(|(l, p)| (p - s0.marginals.get(l).unwrap()).abs() > 1e-12) {
            failures.push("poc no-op");
            break;
        }
    }

    // prior recovery with an empty dataset
    let empty = with_intercept(&parse_regional_csv("bridge,attack\n").unwrap()).unwrap();
    let draws = sample_posterior(&empty, &GaussianPrior::isotropic(1, 0.0, 10.0), SamplerConfig { iterations: 21_000, burn_in: 1_000, seed: 5 }).unwrap();
    let chain: Vec<f64> = draws.coordinate(0).collect();
    if draws.means()[0].abs() >= 3.0 * 10.0 / effective_sample_size(&chain).sqrt() {
        failures.push("prior recovery");
    }

    // curve smoothing bounds and count
    for _ in 0..200 {
        let n = rng.random_range(5..40);
        let items: Vec<Draw> = (0..n)
            .map(|_| Draw { beta: BetaVector(vec![rng.random_range(-4.0..4.0)]), log_posterior: rng.random_range(-20.0..0.0) })
            .collect();
        let raw_max = items.iter().map(|d| d.log_posterior).fold(f64::NEG_INFINITY, f64::max);
        let draws = PosteriorDraws {
            draws: items.clone(),
            meta: SamplerMeta { iterations: n, burn_in: 0, seeds: vec![0], acceptance_rate: 0.0, coordinate_acceptance: vec![], proposal_scales: vec![] },
        };
        let window = [1usize, 3, 5][rng.random_range(0..3)];
        let cfg = InducedCurveConfig { sampling: CurveSampling::AllDraws, smoothing_window: window, seed: 0 };
        let curve = induce_curve(&draws, &routerisk_core::ingest::CovariateVector(vec![1.0]), &cfg).unwrap();
        let mut raw: Vec<(f64, usize, f64)> = items
            .iter()
            .enumerate()
            .map(|(i, d)| (1.0 / (1.0 + (-d.beta.0[0]).exp()), i, (d.log_posterior - raw_max).exp()))
            .collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let weights: Vec<f64> = raw.iter().map(|r| r.2).collect();
        let smoothed = moving_average(&weights, window);
        let top = smoothed.iter().copied().fold(0.0, f64::max);
        let half = window / 2;
        let ok = curve.points().len() == n
            && curve.points().iter().enumerate().all(|(i, pt)| {
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(n);
                let min = weights[lo..hi].iter().copied().fold(f64::INFINITY, f64::min) / top;
                let max = weights[lo..hi].iter().copied().fold(0.0, f64::max) / top;
                pt.weight >= min - 1e-12 && pt.weight <= max + 1e-12
            });
        if !ok {
            failures.push("smoothing bounds");
            break;
        }
    }

    // route enumeration against a brute-force path count
    for _ in 0..200 {
        let net = random_network(&mut rng);
        let routes = enumerate_routes(&net).unwrap();
        if routes.len() != count_paths(&net) || routes.iter().any(|r| !net.is_route(r)) {
            failures.push("route enumeration");
            break;
        }
    }

    Verdict {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "envelope, proportionality, POC no-op, prior recovery, smoothing bounds, route enumeration".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    }
}

/// Counts simple source-to-sink paths by trying every ordered sequence of
/// distinct intermediate nodes.
fn count_paths(net: &Network) -> usize {
    let inner: Vec<&String> = net.nodes.iter().filter(|n| **n != net.source && **n != net.sink).collect();
    let edges = |a: &str, b: &str| net.links.iter().filter(|l| (l.a == a && l.b == b) || (l.a == b && l.b == a)).count();
    let mut total = 0;
    for mask in 0u32..(1 << inner.len()) {
        let chosen: Vec<&String> = (0..inner.len()).filter(|i| mask >> i & 1 == 1).map(|i| inner[i]).collect();
        let mut perm: Vec<usize> = (0..chosen.len()).collect();
        loop {
            let mut seq = vec![net.source.as_str()];
            seq.extend(perm.iter().map(|&i| chosen[i].as_str()));
            seq.push(net.sink.as_str());
            total += seq.windows(2).map(|w| edges(w[0], w[1])).product::<usize>();
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    total
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn standalone() -> Verdict {
    let manifest = include_str!("../Cargo.toml");
    let deps: Vec<&str> = manifest
        .lines()
        .skip_while(|l| l.trim() != "[dependencies]")
        .skip(1)
        .take_while(|l| !l.starts_with('['))
        .filter_map(|l| l.split('=').next().map(str::trim))
        .filter(|l| !l.is_empty())
        .collect();
    let internal: Vec<&&str> = deps.iter().filter(|d| d.starts_with("routerisk")).collect();
    Verdict {
        pass: internal.is_empty(),
        detail: format!("core depends only on [{}]", deps.join(", ")),
    }
}

fn main() -> ExitCode {
    let results = [
        check("decision-layer reproduction", Duration::from_secs(1), decision_reproduction),
        check("closed-form fusion oracles", Duration::from_secs(1), closed_form_fusion),
        check("inclusion-exclusion brute-force equivalence", Duration::from_secs(10), brute_force_equivalence),
        check("MLE reproduction", Duration::from_secs(1), mle_reproduction),
        check("Bayes reproduction", Duration::from_secs(30), bayes_reproduction),
        check("end-to-end new-bridge assessment", Duration::from_secs(60), end_to_end),
        check("property suites", Duration::from_secs(60), property_suites),
        check("primary suite builds without secondary components", Duration::from_secs(1), standalone),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
