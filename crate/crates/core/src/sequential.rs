//! Leg-by-leg route planning: after each crossing the observed outcome
//! updates the remaining link probabilities and the route is re-chosen from
//! the current node.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{
    recommend_from, DecisionError, DecisionResult, DependencyModel, LinkProbabilities, UtilitySpec,
};
use crate::netmodel::{enumerate_routes, LinkId, Network, NetworkError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("link {link} does not touch the current node {node}")]
    NotAdjacent { link: LinkId, node: String },
    #[error("link {link} leads back to already visited node {node}")]
    Revisit { link: LinkId, node: String },
    #[error("route complete: already at the sink {0}")]
    RouteComplete(String),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("weights must be positive and finite, got clear={w_clear}, incident={w_incident}")]
    InvalidWeights { w_clear: f64, w_incident: f64 },
    #[error("conditional probability {value} for link {link} is outside [0, 1]")]
    InvalidConditional { link: LinkId, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Clear,
    Incident,
}

impl Outcome {
    pub fn is_incident(self) -> bool {
        self == Outcome::Incident
    }
}

/// Whether an observed outcome turns stored conditionals into the new
/// marginals (`Upheld`) or is folded in by a subjective reweighting (`Rejected`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PocMode {
    #[default]
    Upheld,
    Rejected,
}

/// Links whose probabilities a rejected-mode reweighting touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReweightScope {
    /// Untraversed links at the node just reached.
    #[default]
    Adjacent,
    /// Every untraversed link.
    Downstream,
}

/// Relative likelihoods of "no IED" and "IED" on the next link given the
/// observation just made.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PocWeights {
    pub w_clear: f64,
    pub w_incident: f64,
}

impl Default for PocWeights {
    fn default() -> Self {
        Self {
            w_clear: 1.0,
            w_incident: 1.0,
        }
    }
}

impl PocWeights {
    pub fn validate(&self) -> Result<(), SessionError> {
        let ok = |w: f64| w > 0.0 && w.is_finite();
        if ok(self.w_clear) && ok(self.w_incident) {
            Ok(())
        } else {
            Err(SessionError::InvalidWeights {
                w_clear: self.w_clear,
                w_incident: self.w_incident,
            })
        }
    }

    /// `w_I·p / (w_I·p + w_C·(1 − p))`.
    pub fn reweight(&self, p: f64) -> f64 {
        let attack = self.w_incident * p;
        let clear = self.w_clear * (1.0 - p);
        attack / (attack + clear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PocSettings {
    pub mode: PocMode,
    #[serde(default)]
    pub weights: PocWeights,
    #[serde(default)]
    pub scope: ReweightScope,
}

/// A directly assessed `P(IED on target | outcome on given)`, for example
/// from a conditional assessment with the preceding-incident indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeConditional {
    pub given: LinkId,
    pub outcome: Outcome,
    pub target: LinkId,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub link: LinkId,
    pub outcome: Outcome,
    /// Overrides the session's weights for this step only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<PocWeights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversedLink {
    pub link: LinkId,
    pub from: String,
    pub to: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    InProgress,
    Complete,
    /// No route to the sink avoids the nodes already visited.
    Stranded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegDecision {
    pub at_node: String,
    pub observation: Option<Observation>,
    pub marginals: LinkProbabilities,
    pub decision: Option<DecisionResult>,
}

/// First link of a continuation and the routes that start with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub first_link: LinkId,
    pub routes: Vec<crate::netmodel::Route>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialSession {
    pub session_id: String,
    /// Starts at 1 and grows by one per recorded observation.
    pub revision: u64,
    pub network: Network,
    pub current_node: String,
    pub traversed: Vec<TraversedLink>,
    pub poc: PocSettings,
    pub model: DependencyModel,
    pub utility: UtilitySpec,
    pub marginals: LinkProbabilities,
    #[serde(default)]
    pub outcome_conditionals: Vec<OutcomeConditional>,
    pub status: SessionStatus,
    pub log: Vec<LegDecision>,
}

impl SequentialSession {
    /// Starts at the network source with an initial recommendation.
    pub fn start(
        session_id: impl Into<String>,
        network: Network,
        marginals: LinkProbabilities,
        model: DependencyModel,
        utility: UtilitySpec,
        poc: PocSettings,
    ) -> Result<Self, SessionError> {
        network.ensure_valid().map_err(DecisionError::from)?;
        marginals.check_covers(&network)?;
        poc.weights.validate()?;
        let max_len = enumerate_routes(&network)
            .map_err(DecisionError::from)?
            .iter()
            .map(|r| r.len())
            .max()
            .unwrap_or(0);
        utility.validate(max_len)?;
        let mut session = Self {
            session_id: session_id.into(),
            revision: 1,
            current_node: network.source.clone(),
            network,
            traversed: Vec::new(),
            poc,
            model,
            utility,
            marginals,
            outcome_conditionals: Vec::new(),
            status: SessionStatus::InProgress,
            log: Vec::new(),
        };
        session.decide(None)?;
        Ok(session)
    }

    pub fn with_outcome_conditionals(mut self, table: Vec<OutcomeConditional>) -> Result<Self, SessionError> {
        for oc in &table {
            if !(0.0..=1.0).contains(&oc.p) {
                return Err(SessionError::InvalidConditional {
                    link: oc.target.clone(),
                    value: oc.p,
                });
            }
        }
        self.outcome_conditionals = table;
        Ok(self)
    }

    pub fn visited_nodes(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.traversed.iter().map(|t| t.from.clone()).collect();
        out.insert(self.current_node.clone());
        out
    }

    pub fn current_decision(&self) -> Option<&DecisionResult> {
        self.log.last().and_then(|l| l.decision.as_ref())
    }

    /// Distinct first links of the routes still available, with their routes.
    pub fn continuations(&self) -> Vec<Continuation> {
        let Some(decision) = self.current_decision() else {
            return Vec::new();
        };
        let mut out: Vec<Continuation> = Vec::new();
        for eval in &decision.per_route {
            let first = eval.route.links[0].clone();
            match out.iter_mut().find(|c| c.first_link == first) {
                Some(c) => c.routes.push(eval.route.clone()),
                None => out.push(Continuation {
                    first_link: first,
                    routes: vec![eval.route.clone()],
                }),
            }
        }
        out.sort_by(|a, b| a.first_link.cmp(&b.first_link));
        out
    }

    fn decide(&mut self, observation: Option<Observation>) -> Result<(), SessionError> {
        let decision = if self.current_node == self.network.sink {
            self.status = SessionStatus::Complete;
            None
        } else {
            let mut blocked = self.visited_nodes();
            blocked.remove(&self.current_node);
            match recommend_from(
                &self.network,
                &self.current_node,
                &blocked,
                &self.marginals,
                &self.model,
                &self.utility,
            ) {
                Ok(d) => Some(d),
                Err(DecisionError::Network(NetworkError::UnreachableSink { .. })) => {
                    self.status = SessionStatus::Stranded;
                    None
                }
                Err(e) => return Err(e.into()),
            }
        };
        self.log.push(LegDecision {
            at_node: self.current_node.clone(),
            observation,
            marginals: self.marginals.clone(),
            decision,
        });
        Ok(())
    }
}

/// `P(IED on target | outcome on given)` from the explicit table or, failing
/// that, from the dependency model's pair conditionals.
fn conditional_for(
    session: &SequentialSession,
    given: &LinkId,
    outcome: Outcome,
    target: &LinkId,
) -> Result<Option<f64>, SessionError> {
    if let Some(oc) = session
        .outcome_conditionals
        .iter()
        .find(|oc| &oc.given == given && oc.outcome == outcome && &oc.target == target)
    {
        return Ok(Some(oc.p));
    }
    let Some(given_event) = session.model.conditional(given, target, &session.marginals)? else {
        return Ok(None);
    };
    Ok(Some(match outcome {
        Outcome::Incident => given_event,
        Outcome::Clear => {
            let p_given = session.marginals.get(given)?;
            let p_target = session.marginals.get(target)?;
            if p_given == 1.0 {
                p_target
            } else {
                let c = (p_target - given_event * p_given) / (1.0 - p_given);
                if !(-1e-12..=1.0 + 1e-12).contains(&c) {
                    return Err(DecisionError::Incoherent(format!(
                        "P({target} | no IED on {given}) = {c}"
                    ))
                    .into());
                }
                c.clamp(0.0, 1.0)
            }
        }
    }))
}

/// Records one crossing and re-plans from the node reached. The input
/// session is left untouched, which makes what-if previews free.
pub fn sequential_update(
    session: &SequentialSession,
    observation: &Observation,
) -> Result<SequentialSession, SessionError> {
    if session.current_node == session.network.sink || session.status == SessionStatus::Complete {
        return Err(SessionError::RouteComplete(session.current_node.clone()));
    }
    let link = session
        .network
        .link(&observation.link)
        .ok_or_else(|| SessionError::UnknownLink(observation.link.clone()))?;
    let next = link
        .other_end(&session.current_node)
        .ok_or_else(|| SessionError::NotAdjacent {
            link: observation.link.clone(),
            node: session.current_node.clone(),
        })?
        .to_string();
    if session.visited_nodes().contains(&next) {
        return Err(SessionError::Revisit {
            link: observation.link.clone(),
            node: next,
        });
    }
    let weights = observation.weights.unwrap_or(session.poc.weights);
    weights.validate()?;

    let mut out = session.clone();
    out.traversed.push(TraversedLink {
        link: observation.link.clone(),
        from: session.current_node.clone(),
        to: next.clone(),
        outcome: observation.outcome,
    });
    out.current_node = next;

    let traversed: BTreeSet<&LinkId> = out.traversed.iter().map(|t| &t.link).collect();
    let ahead: Vec<LinkId> = out
        .network
        .links
        .iter()
        .filter(|l| !traversed.contains(&l.id))
        .filter(|l| match (session.poc.mode, session.poc.scope) {
            (PocMode::Rejected, ReweightScope::Adjacent) => l.touches(&out.current_node),
            _ => true,
        })
        .map(|l| l.id.clone())
        .collect();

    let mut updated = session.marginals.clone();
    for target in &ahead {
        match session.poc.mode {
            PocMode::Upheld => {
                if let Some(p) = conditional_for(session, &observation.link, observation.outcome, target)? {
                    updated.insert(target.clone(), p);
                }
            }
            PocMode::Rejected => {
                let p = session.marginals.get(target)?;
                updated.insert(target.clone(), weights.reweight(p));
            }
        }
    }
    out.marginals = updated;
    out.revision += 1;
    out.status = SessionStatus::InProgress;
    out.decide(Some(observation.clone()))?;
    Ok(out)
}
