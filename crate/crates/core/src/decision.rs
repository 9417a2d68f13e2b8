//! Route success probabilities, expected utilities and the nonsequential
//! route recommendation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{enumerate_routes_from, LinkId, Network, NetworkError, Route};

/// Inclusion-exclusion visits every subset of a route's links.
pub const MAX_INCLUSION_EXCLUSION_LINKS: usize = 24;

const TIE_TOLERANCE: f64 = 1e-12;
const COHERENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("no probability for link {0}")]
    MissingProbability(LinkId),
    #[error("probability {value} for link {link} is outside [0, 1]")]
    ProbabilityOutOfRange { link: LinkId, value: f64 },
    #[error("dependency model gives no conditional between links {given} and {target}")]
    MissingConditional { given: LinkId, target: LinkId },
    #[error("incoherent dependency model: {0}")]
    Incoherent(String),
    #[error("route has {0} links; inclusion-exclusion is limited to {MAX_INCLUSION_EXCLUSION_LINKS}")]
    RouteTooLong(usize),
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
    #[error("scaled probability {value} for link {link} exceeds 1")]
    ScaledAboveOne { link: LinkId, value: f64 },
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("no routes to evaluate")]
    NoRoutes,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Per-link probability that the next crossing meets an IED.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkProbabilities(pub BTreeMap<LinkId, f64>);

impl LinkProbabilities {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, link: LinkId, p: f64) {
        self.0.insert(link, p);
    }

    pub fn get(&self, link: &LinkId) -> Result<f64, DecisionError> {
        let p = *self
            .0
            .get(link)
            .ok_or_else(|| DecisionError::MissingProbability(link.clone()))?;
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(DecisionError::ProbabilityOutOfRange {
                link: link.clone(),
                value: p,
            })
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LinkId, &f64)> {
        self.0.iter()
    }

    /// Checks that every network link has a probability in `[0, 1]`.
    pub fn check_covers(&self, network: &Network) -> Result<(), DecisionError> {
        for link in &network.links {
            self.get(&link.id)?;
        }
        Ok(())
    }
}

impl FromIterator<(LinkId, f64)> for LinkProbabilities {
    fn from_iter<I: IntoIterator<Item = (LinkId, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// `P(IED on target | IED on given)` for a pair of consecutive links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConditional {
    pub given: LinkId,
    pub target: LinkId,
    pub p: f64,
}

/// How IED events on the links of one route relate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependencyModel {
    #[default]
    Independent,
    /// Events form a Markov chain along the route: given the event on the
    /// previous link, the next link is independent of everything earlier.
    ConditionalChain { conditionals: Vec<PairConditional> },
}

impl DependencyModel {
    /// `P(E_target | E_given)`, using Bayes' rule on the reverse pair when
    /// only that one is stored.
    pub fn conditional(
        &self,
        given: &LinkId,
        target: &LinkId,
        marginals: &LinkProbabilities,
    ) -> Result<Option<f64>, DecisionError> {
        let DependencyModel::ConditionalChain { conditionals } = self else {
            return Ok(None);
        };
        let check = |c: f64, what: &str| {
            if (-COHERENCE_TOLERANCE..=1.0 + COHERENCE_TOLERANCE).contains(&c) {
                Ok(c.clamp(0.0, 1.0))
            } else {
                Err(DecisionError::Incoherent(format!(
                    "{what} P({target} | {given}) = {c}"
                )))
            }
        };
        if let Some(pc) = conditionals
            .iter()
            .find(|pc| &pc.given == given && &pc.target == target)
        {
            return check(pc.p, "stored").map(Some);
        }
        if let Some(pc) = conditionals
            .iter()
            .find(|pc| &pc.given == target && &pc.target == given)
        {
            let p_given = marginals.get(given)?;
            let p_target = marginals.get(target)?;
            if p_given == 0.0 {
                // conditioning on a null event; any value gives the same joints
                return Ok(Some(p_target));
            }
            return check(pc.p * p_target / p_given, "derived").map(Some);
        }
        Ok(None)
    }
}

/// `Π (1 - p(j))` over the route's links.
pub fn route_success_independent(
    route: &Route,
    marginals: &LinkProbabilities,
) -> Result<f64, DecisionError> {
    route
        .links
        .iter()
        .try_fold(1.0, |acc, link| Ok(acc * (1.0 - marginals.get(link)?)))
}

/// Per-step transition probabilities along a route: for each link after
/// the first, `(P(E_next | E_prev), P(E_next | not E_prev))`.
fn chain_transitions(
    route: &Route,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
) -> Result<Vec<(f64, f64)>, DecisionError> {
    let mut out = Vec::with_capacity(route.len().saturating_sub(1));
    for pair in route.links.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let p_prev = marginals.get(prev)?;
        let p_next = marginals.get(next)?;
        let given_event = model.conditional(prev, next, marginals)?.ok_or_else(|| {
            DecisionError::MissingConditional {
                given: prev.clone(),
                target: next.clone(),
            }
        })?;
        let given_clear = if p_prev == 1.0 {
            p_next
        } else {
            (p_next - given_event * p_prev) / (1.0 - p_prev)
        };
        if !(-COHERENCE_TOLERANCE..=1.0 + COHERENCE_TOLERANCE).contains(&given_clear) {
            return Err(DecisionError::Incoherent(format!(
                "P({next} | no IED on {prev}) = {given_clear}"
            )));
        }
        out.push((given_event, given_clear.clamp(0.0, 1.0)));
    }
    Ok(out)
}

/// Joint probability that every route position flagged in `mask` has an IED.
fn chain_joint(marginal_first: f64, transitions: &[(f64, f64)], mask: u32) -> f64 {
    // forward pass over (IED, no IED) at the current position
    let keep = |i: usize, v: (f64, f64)| if mask >> i & 1 == 1 { (v.0, 0.0) } else { v };
    let mut state = keep(0, (marginal_first, 1.0 - marginal_first));
    for (i, &(ge, gc)) in transitions.iter().enumerate() {
        let next = (
            state.0 * ge + state.1 * gc,
            state.0 * (1.0 - ge) + state.1 * (1.0 - gc),
        );
        state = keep(i + 1, next);
    }
    state.0 + state.1
}

/// Route failure probability by inclusion-exclusion over all nonempty
/// subsets of the route's links.
pub fn route_failure_inclusion_exclusion(
    route: &Route,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
) -> Result<f64, DecisionError> {
    let n = route.len();
    if n > MAX_INCLUSION_EXCLUSION_LINKS {
        return Err(DecisionError::RouteTooLong(n));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let ps = route
        .links
        .iter()
        .map(|l| marginals.get(l))
        .collect::<Result<Vec<_>, _>>()?;
    let joint: Box<dyn Fn(u32) -> f64> = match model {
        DependencyModel::Independent => Box::new(|mask: u32| {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ps[i])
                .product()
        }),
        DependencyModel::ConditionalChain { .. } => {
            let transitions = chain_transitions(route, marginals, model)?;
            let first = ps[0];
            Box::new(move |mask: u32| chain_joint(first, &transitions, mask))
        }
    };
    let mut failure = 0.0;
    for mask in 1u32..(1 << n) {
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        failure += sign * joint(mask);
    }
    if !(-COHERENCE_TOLERANCE..=1.0 + COHERENCE_TOLERANCE).contains(&failure) {
        return Err(DecisionError::Incoherent(format!(
            "failure probability {failure} for route {route}"
        )));
    }
    Ok(failure.clamp(0.0, 1.0))
}

/// Utility of arriving safely versus meeting an IED.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilitySpec {
    /// 1 on success, 0 on failure.
    #[default]
    Binary,
    /// `1 - n/x_util` on success and `-n/x_util` on failure for an `n`-link route.
    LengthPenalty { x_util: f64 },
}

impl UtilitySpec {
    /// `x_util` must exceed the longest route so that success keeps positive utility.
    pub fn validate(&self, max_route_len: usize) -> Result<(), DecisionError> {
        match *self {
            UtilitySpec::Binary => Ok(()),
            UtilitySpec::LengthPenalty { x_util } => {
                if x_util.is_finite() && x_util > max_route_len as f64 {
                    Ok(())
                } else {
                    Err(DecisionError::InvalidUtility(format!(
                        "x_util {x_util} must exceed the longest route length {max_route_len}"
                    )))
                }
            }
        }
    }
}

pub fn expected_utility(
    route: &Route,
    p_success: f64,
    utility: &UtilitySpec,
) -> Result<f64, DecisionError> {
    if !(0.0..=1.0).contains(&p_success) {
        return Err(DecisionError::InvalidUtility(format!(
            "success probability {p_success} is outside [0, 1]"
        )));
    }
    utility.validate(route.len())?;
    Ok(match *utility {
        UtilitySpec::Binary => p_success,
        UtilitySpec::LengthPenalty { x_util } => {
            let penalty = route.len() as f64 / x_util;
            p_success * (1.0 - penalty) + (1.0 - p_success) * -penalty
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEvaluation {
    pub route: Route,
    pub p_success: f64,
    pub p_failure: f64,
    pub expected_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub per_route: Vec<RouteEvaluation>,
    /// Index into `per_route`.
    pub recommended: usize,
    /// More than one route attained the maximum.
    pub tie_broken: bool,
}

impl DecisionResult {
    pub fn recommended_route(&self) -> &Route {
        &self.per_route[self.recommended].route
    }

    /// Aligned plain-text table, recommended route marked with `*`.
    pub fn to_table(&self) -> String {
        let mut out = format!("  {:<28} {:>9} {:>9} {:>9}\n", "route", "p_success", "p_failure", "E[U]");
        for (i, r) in self.per_route.iter().enumerate() {
            let mark = if i == self.recommended { '*' } else { ' ' };
            out.push_str(&format!(
                "{mark} {:<28} {:>9.5} {:>9.5} {:>9.5}\n",
                r.route.to_string(),
                r.p_success,
                r.p_failure,
                r.expected_utility
            ));
        }
        out
    }
}

fn success_probability(
    route: &Route,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
) -> Result<f64, DecisionError> {
    match model {
        DependencyModel::Independent => route_success_independent(route, marginals),
        DependencyModel::ConditionalChain { .. } => {
            Ok(1.0 - route_failure_inclusion_exclusion(route, marginals, model)?)
        }
    }
}

/// Scores explicit routes and picks the best; ties go to fewer links, then
/// to the lexicographically smaller route.
pub fn evaluate_routes(
    routes: Vec<Route>,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
    utility: &UtilitySpec,
) -> Result<DecisionResult, DecisionError> {
    let max_len = routes.iter().map(Route::len).max().unwrap_or(0);
    utility.validate(max_len)?;
    let mut per_route = Vec::with_capacity(routes.len());
    for route in routes {
        let p_success = success_probability(&route, marginals, model)?;
        let expected_utility = expected_utility(&route, p_success, utility)?;
        per_route.push(RouteEvaluation {
            route,
            p_success,
            p_failure: 1.0 - p_success,
            expected_utility,
        });
    }
    let best = per_route
        .iter()
        .map(|r| r.expected_utility)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..per_route.len())
        .filter(|&i| best - per_route[i].expected_utility <= TIE_TOLERANCE)
        .collect();
    let recommended = *tied
        .iter()
        .min_by(|&&a, &&b| per_route[a].route.cmp(&per_route[b].route))
        .ok_or(DecisionError::NoRoutes)?;
    Ok(DecisionResult {
        per_route,
        recommended,
        tie_broken: tied.len() > 1,
    })
}

/// Evaluates every source-to-sink route of `network`.
pub fn recommend(
    network: &Network,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
    utility: &UtilitySpec,
) -> Result<DecisionResult, DecisionError> {
    recommend_from(network, &network.source, &BTreeSet::new(), marginals, model, utility)
}

/// Evaluates the routes from `start` that avoid the `blocked` nodes.
pub fn recommend_from(
    network: &Network,
    start: &str,
    blocked: &BTreeSet<String>,
    marginals: &LinkProbabilities,
    model: &DependencyModel,
    utility: &UtilitySpec,
) -> Result<DecisionResult, DecisionError> {
    let routes = enumerate_routes_from(network, start, blocked)?;
    evaluate_routes(routes, marginals, model, utility)
}

/// Calibrates every link from one assessed link by length: `p(j) = r(j)/r(ref) · p(ref)`.
///
/// With `round_to_cents` the scaled values are rounded to two decimals; the
/// reference link always keeps the exact `reference_p`.
pub fn scale_link_probabilities(
    network: &Network,
    reference_link: &LinkId,
    reference_p: f64,
    round_to_cents: bool,
) -> Result<LinkProbabilities, DecisionError> {
    if !(0.0..=1.0).contains(&reference_p) {
        return Err(DecisionError::ProbabilityOutOfRange {
            link: reference_link.clone(),
            value: reference_p,
        });
    }
    let reference = network
        .link(reference_link)
        .ok_or_else(|| DecisionError::UnknownLink(reference_link.clone()))?;
    let mut out = LinkProbabilities::new();
    for link in &network.links {
        if &link.id == reference_link {
            out.insert(link.id.clone(), reference_p);
            continue;
        }
        let value = link.length_ratio / reference.length_ratio * reference_p;
        if value > 1.0 {
            return Err(DecisionError::ScaledAboveOne {
                link: link.id.clone(),
                value,
            });
        }
        let value = if round_to_cents {
            (value * 100.0).round() / 100.0
        } else {
            value
        };
        out.insert(link.id.clone(), value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_link, scaled_marginals};
    use crate::netmodel::figure1_network;
    use proptest::prelude::*;

    fn probs(pairs: &[(u32, f64)]) -> LinkProbabilities {
        pairs.iter().map(|&(l, p)| (LinkId::from(l), p)).collect()
    }

    /// Failure probability by summing over all 2^n outcome vectors.
    fn brute_force_failure(ps: &[f64]) -> f64 {
        let n = ps.len();
        let mut failure = 0.0;
        for outcome in 0u32..(1 << n) {
            if outcome == 0 {
                continue;
            }
            let mut prob = 1.0;
            for (i, p) in ps.iter().enumerate() {
                prob *= if outcome >> i & 1 == 1 { *p } else { 1.0 - p };
            }
            failure += prob;
        }
        failure
    }

    #[test]
    fn worked_example_success_probabilities() {
        let m = scaled_marginals();
        let routes = [Route::from_ids(&[1, 2, 9]), Route::from_ids(&[1, 2, 3, 4, 5, 6, 7, 8]), Route::from_ids(&[1, 2, 3, 4, 10])];
        let expected = [0.444, 0.441, 0.480];
        for (r, e) in routes.iter().zip(expected) {
            let s = route_success_independent(r, &m).unwrap();
            assert!((s - e).abs() < 1e-3, "{r}: {s}");
        }
    }

    #[test]
    fn three_link_failure_example() {
        let m = probs(&[(1, 0.2), (2, 0.2), (9, 0.306)]);
        let r = Route::from_ids(&[1, 2, 9]);
        let f = route_failure_inclusion_exclusion(&r, &m, &DependencyModel::Independent).unwrap();
        assert!((f - 0.55584).abs() < 1e-12);
        assert!((f - brute_force_failure(&[0.2, 0.2, 0.306])).abs() < 1e-12);
    }

    #[test]
    fn all_zero_marginals() {
        let m = probs(&[(1, 0.0), (2, 0.0), (9, 0.0)]);
        let r = Route::from_ids(&[1, 2, 9]);
        assert_eq!(route_success_independent(&r, &m).unwrap(), 1.0);
        assert_eq!(route_failure_inclusion_exclusion(&r, &m, &DependencyModel::Independent).unwrap(), 0.0);
    }

    #[test]
    fn missing_probability() {
        let m = probs(&[(1, 0.2)]);
        assert_eq!(
            route_success_independent(&Route::from_ids(&[1, 2]), &m),
            Err(DecisionError::MissingProbability(LinkId::from(2)))
        );
    }

    #[test]
    fn chain_with_marginal_conditionals_matches_independence() {
        let m = probs(&[(1, 0.2), (2, 0.3), (9, 0.306)]);
        let model = DependencyModel::ConditionalChain {
            conditionals: vec![
                PairConditional { given: LinkId::from(1), target: LinkId::from(2), p: 0.3 },
                PairConditional { given: LinkId::from(2), target: LinkId::from(9), p: 0.306 },
            ],
        };
        let r = Route::from_ids(&[1, 2, 9]);
        let chain = route_failure_inclusion_exclusion(&r, &m, &model).unwrap();
        let ind = 1.0 - route_success_independent(&r, &m).unwrap();
        assert!((chain - ind).abs() < 1e-12);
    }

    #[test]
    fn chain_three_term_expansion() {
        // p(1,2,9) = p(9|2) p(2|1) p(1), pairwise joints from the same chain
        let (p1, p2, p9, c12, c29) = (0.2, 0.25, 0.3, 0.6, 0.5);
        let m = probs(&[(1, p1), (2, p2), (9, p9)]);
        let model = DependencyModel::ConditionalChain {
            conditionals: vec![
                PairConditional { given: LinkId::from(1), target: LinkId::from(2), p: c12 },
                // stored in reverse to exercise the Bayes inversion
                PairConditional { given: LinkId::from(9), target: LinkId::from(2), p: c29 * p2 / p9 },
            ],
        };
        let p12 = c12 * p1;
        let p29 = c29 * p2;
        let c2n = (p2 - c12 * p1) / (1.0 - p1);
        let c9n = (p9 - c29 * p2) / (1.0 - p2);
        // P(E1, E9) = P(E1) [c12 c29 + (1 - c12) c9n]
        let p19 = p1 * (c12 * c29 + (1.0 - c12) * c9n);
        let p129 = p1 * c12 * c29;
        let expected = p1 + p2 + p9 - p12 - p19 - p29 + p129;
        let r = Route::from_ids(&[1, 2, 9]);
        let got = route_failure_inclusion_exclusion(&r, &m, &model).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(c2n >= 0.0 && c9n >= 0.0);
    }

    #[test]
    fn incoherent_chain_detected() {
        let m = probs(&[(1, 0.5), (2, 0.1)]);
        let model = DependencyModel::ConditionalChain {
            conditionals: vec![PairConditional { given: LinkId::from(1), target: LinkId::from(2), p: 0.9 }],
        };
        let err = route_failure_inclusion_exclusion(&Route::from_ids(&[1, 2]), &m, &model).unwrap_err();
        assert!(matches!(err, DecisionError::Incoherent(_)));
        let missing = DependencyModel::ConditionalChain { conditionals: vec![] };
        assert!(matches!(
            route_failure_inclusion_exclusion(&Route::from_ids(&[1, 2]), &m, &missing),
            Err(DecisionError::MissingConditional { .. })
        ));
    }

    #[test]
    fn expected_utility_examples() {
        let u = UtilitySpec::LengthPenalty { x_util: 100.0 };
        let eu = expected_utility(&Route::from_ids(&[1, 2, 9]), 0.444, &u).unwrap();
        assert!((eu - 0.414).abs() < 1e-12);
        let eu = expected_utility(&Route::from_ids(&[1, 2, 3, 4, 5, 6, 7, 8]), 0.441, &u).unwrap();
        assert!((eu - 0.361).abs() < 1e-12);
        assert_eq!(expected_utility(&Route::from_ids(&[1]), 0.3, &UtilitySpec::Binary).unwrap(), 0.3);
        assert!(expected_utility(&Route::from_ids(&[1, 2, 3]), 0.5, &UtilitySpec::LengthPenalty { x_util: 3.0 }).is_err());
    }

    #[test]
    fn recommendations_match_worked_example() {
        let net = figure1_network();
        let m = scaled_marginals();
        let r = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 100.0 }).unwrap();
        assert_eq!(r.recommended_route(), &Route::from_ids(&[1, 2, 3, 4, 10]));
        let eus: Vec<f64> = r.per_route.iter().map(|e| e.expected_utility).collect();
        for (got, want) in eus.iter().zip([0.414, 0.430, 0.361]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
        let r10 = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 10.0 }).unwrap();
        assert_eq!(r10.recommended_route(), &Route::from_ids(&[1, 2, 9]));
        let rb = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::Binary).unwrap();
        assert_eq!(rb.recommended_route(), &Route::from_ids(&[1, 2, 3, 4, 10]));
        assert!(!r.tie_broken);
        assert!(r.to_table().contains("* (1,2,3,4,10)"));
    }

    #[test]
    fn x_util_must_exceed_longest_route() {
        let net = figure1_network();
        let m = scaled_marginals();
        assert!(matches!(
            recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::LengthPenalty { x_util: 8.0 }),
            Err(DecisionError::InvalidUtility(_))
        ));
    }

    #[test]
    fn ties_prefer_shorter_then_lexicographic() {
        let m = probs(&[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)]);
        let routes = vec![Route::from_ids(&[3, 4]), Route::from_ids(&[2]), Route::from_ids(&[1])];
        let r = evaluate_routes(routes, &m, &DependencyModel::Independent, &UtilitySpec::Binary).unwrap();
        assert_eq!(r.recommended_route(), &Route::from_ids(&[1]));
        assert!(r.tie_broken);
    }

    #[test]
    fn scaling_matches_fixture() {
        let net = figure1_network();
        let m = scale_link_probabilities(&net, &reference_link(), 0.306, true).unwrap();
        assert_eq!(m, scaled_marginals());
        let raw = scale_link_probabilities(&net, &reference_link(), 0.306, false).unwrap();
        assert!((raw.get(&LinkId::from(1)).unwrap() - 0.66 * 0.306).abs() < 1e-15);
        let zero = scale_link_probabilities(&net, &reference_link(), 0.0, true).unwrap();
        assert!(zero.iter().all(|(_, p)| *p == 0.0));
        assert!(matches!(
            scale_link_probabilities(&net, &LinkId::from(3), 0.5, false),
            Err(DecisionError::ScaledAboveOne { .. })
        ));
        assert!(scale_link_probabilities(&net, &LinkId::from(99), 0.5, false).is_err());
    }

    fn arb_probs(max: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..=1.0, 1..=max)
    }

    proptest! {
        #[test]
        fn inclusion_exclusion_matches_enumeration(ps in arb_probs(6)) {
            let ids: Vec<u32> = (1..=ps.len() as u32).collect();
            let m = probs(&ids.iter().copied().zip(ps.iter().copied()).collect::<Vec<_>>());
            let route = Route::from_ids(&ids);
            let ie = route_failure_inclusion_exclusion(&route, &m, &DependencyModel::Independent).unwrap();
            let prod = 1.0 - route_success_independent(&route, &m).unwrap();
            prop_assert!((ie - prod).abs() < 1e-12);
            prop_assert!((ie - brute_force_failure(&ps)).abs() < 1e-12);
        }

        #[test]
        fn length_penalty_offset(p in 0.0f64..=1.0, n in 1usize..12, x in 12.0f64..500.0) {
            let route = Route::from_ids(&(1..=n as u32).collect::<Vec<_>>());
            let lp = expected_utility(&route, p, &UtilitySpec::LengthPenalty { x_util: x }).unwrap();
            let b = expected_utility(&route, p, &UtilitySpec::Binary).unwrap();
            prop_assert!((lp - b + n as f64 / x).abs() < 1e-12);
        }

        #[test]
        fn argmax_invariant_to_common_shift(ps in proptest::collection::vec(0.0f64..1.0, 10), shift in -5.0f64..5.0) {
            let net = figure1_network();
            let m = probs(&(1..=10u32).zip(ps).collect::<Vec<_>>());
            let r = recommend(&net, &m, &DependencyModel::Independent, &UtilitySpec::Binary).unwrap();
            let best = r.per_route.iter().map(|e| e.expected_utility + shift).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(best - (r.per_route[r.recommended].expected_utility + shift) <= 1e-12);
        }

        #[test]
        fn chain_stays_a_probability(p1 in 0.01f64..0.99, p2 in 0.01f64..0.99, t in 0.0f64..1.0) {
            // pick P(E2|E1) inside the coherent range
            let lo = ((p2 - (1.0 - p1)) / p1).max(0.0);
            let hi = (p2 / p1).min(1.0);
            let c = lo + t * (hi - lo);
            let m = probs(&[(1, p1), (2, p2)]);
            let model = DependencyModel::ConditionalChain {
                conditionals: vec![PairConditional { given: LinkId::from(1), target: LinkId::from(2), p: c }],
            };
            let f = route_failure_inclusion_exclusion(&Route::from_ids(&[1, 2]), &m, &model).unwrap();
            prop_assert!((f - (p1 + p2 - c * p1)).abs() < 1e-12);
        }
    }
}
