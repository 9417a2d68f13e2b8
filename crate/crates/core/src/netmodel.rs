//! Logistics network model and source-to-sink route enumeration.
//!
//! Links are stored undirected; a [`Route`] orients them by traversal order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a link. Ordering is numeric when both ids parse as
/// unsigned integers and lexicographic otherwise, so "9" < "10".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(String);

impl LinkId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for LinkId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<u64>(), other.0.parse::<u64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for LinkId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LinkId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<u32> for LinkId {
    fn from(n: u32) -> Self {
        Self(n.to_string())
    }
}

/// An undirected link between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub a: String,
    pub b: String,
    /// Length relative to the calibration link (dimensionless).
    pub length_ratio: f64,
}

impl Link {
    pub fn touches(&self, node: &str) -> bool {
        self.a == node || self.b == node
    }

    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other_end(&self, node: &str) -> Option<&str> {
        if self.a == node {
            Some(&self.b)
        } else if self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Network interchange document and in-memory model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: Vec<String>,
    pub links: Vec<Link>,
    pub source: String,
    pub sink: String,
}

/// An ordered sequence of links from one node to the sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route {
    pub links: Vec<LinkId>,
}

impl Route {
    pub fn new(links: Vec<LinkId>) -> Self {
        Self { links }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Parses a route from numeric link labels, e.g. `Route::from_ids(&[1, 2, 9])`.
    pub fn from_ids(ids: &[u32]) -> Self {
        Self::new(ids.iter().copied().map(LinkId::from).collect())
    }
}

/// Shortlex: fewer links first, then link-by-link comparison.
impl Ord for Route {
    fn cmp(&self, other: &Self) -> Ordering {
        self.links
            .len()
            .cmp(&other.links.len())
            .then_with(|| self.links.cmp(&other.links))
    }
}

impl PartialOrd for Route {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, id) in self.links.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("sink {sink} is unreachable from {from}")]
    UnreachableSink { from: String, sink: String },
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("malformed network document: {0}")]
    Parse(String),
}

/// One broken network invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DanglingEndpoint { link: LinkId, node: String },
    SourceEqualsSink { node: String },
    MissingTerminal { role: &'static str, node: String },
    NonPositiveLength { link: LinkId, length_ratio: f64 },
    DuplicateLink { link: LinkId },
    DuplicateNode { node: String },
    SelfLoop { link: LinkId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint { link, node } => {
                write!(f, "link {link} has endpoint {node} which is not a node")
            }
            Violation::SourceEqualsSink { node } => write!(f, "source and sink are both {node}"),
            Violation::MissingTerminal { role, node } => {
                write!(f, "{role} {node} is not a node")
            }
            Violation::NonPositiveLength { link, length_ratio } => {
                write!(f, "link {link} has non-positive length ratio {length_ratio}")
            }
            Violation::DuplicateLink { link } => write!(f, "link id {link} appears more than once"),
            Violation::DuplicateNode { node } => write!(f, "node {node} appears more than once"),
            Violation::SelfLoop { link } => write!(f, "link {link} connects a node to itself"),
        }
    }
}

impl Network {
    /// Parses and validates a network interchange document.
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let network: Network =
            serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        network.ensure_valid()?;
        Ok(network)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn link(&self, id: &LinkId) -> Option<&Link> {
        self.links.iter().find(|l| &l.id == id)
    }

    pub fn has_node(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }

    pub fn ensure_valid(&self) -> Result<(), NetworkError> {
        let violations = validate_network(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Links incident to `node`, in link-id order.
    pub fn incident_links(&self, node: &str) -> Vec<&Link> {
        let mut out: Vec<&Link> = self.links.iter().filter(|l| l.touches(node)).collect();
        out.sort_by(|x, y| x.id.cmp(&y.id));
        out
    }

    /// Walks `route` from `start`, returning the visited node sequence.
    pub fn trace(&self, start: &str, route: &Route) -> Result<Vec<String>, NetworkError> {
        let mut nodes = vec![start.to_string()];
        let mut at = start.to_string();
        for id in &route.links {
            let link = self
                .link(id)
                .ok_or_else(|| NetworkError::UnknownLink(id.clone()))?;
            let next = link
                .other_end(&at)
                .ok_or_else(|| NetworkError::Parse(format!("link {id} does not touch node {at}")))?
                .to_string();
            nodes.push(next.clone());
            at = next;
        }
        Ok(nodes)
    }

    /// True when `route` is a simple path from `start` to the sink.
    pub fn is_route_from(&self, start: &str, route: &Route) -> bool {
        match self.trace(start, route) {
            Ok(nodes) => {
                let distinct: BTreeSet<&String> = nodes.iter().collect();
                !route.is_empty()
                    && distinct.len() == nodes.len()
                    && nodes.last().map(String::as_str) == Some(self.sink.as_str())
            }
            Err(_) => false,
        }
    }

    pub fn is_route(&self, route: &Route) -> bool {
        self.is_route_from(&self.source, route)
    }
}

/// Returns every broken invariant; empty iff the network is valid.
pub fn validate_network(network: &Network) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen_nodes = BTreeSet::new();
    for node in &network.nodes {
        if !seen_nodes.insert(node.as_str()) {
            violations.push(Violation::DuplicateNode { node: node.clone() });
        }
    }
    let mut seen_links = BTreeSet::new();
    for link in &network.links {
        if !seen_links.insert(&link.id) {
            violations.push(Violation::DuplicateLink {
                link: link.id.clone(),
            });
        }
        for end in [&link.a, &link.b] {
            if !seen_nodes.contains(end.as_str()) {
                violations.push(Violation::DanglingEndpoint {
                    link: link.id.clone(),
                    node: end.clone(),
                });
            }
        }
        if link.a == link.b {
            violations.push(Violation::SelfLoop {
                link: link.id.clone(),
            });
        }
        if !(link.length_ratio > 0.0 && link.length_ratio.is_finite()) {
            violations.push(Violation::NonPositiveLength {
                link: link.id.clone(),
                length_ratio: link.length_ratio,
            });
        }
    }
    for (role, node) in [("source", &network.source), ("sink", &network.sink)] {
        if !seen_nodes.contains(node.as_str()) {
            violations.push(Violation::MissingTerminal {
                role,
                node: node.clone(),
            });
        }
    }
    if network.source == network.sink {
        violations.push(Violation::SourceEqualsSink {
            node: network.source.clone(),
        });
    }
    violations
}

/// All simple source-to-sink paths in shortlex order.
pub fn enumerate_routes(network: &Network) -> Result<Vec<Route>, NetworkError> {
    enumerate_routes_from(network, &network.source, &BTreeSet::new())
}

/// All simple paths from `start` to the sink that avoid the `blocked` nodes.
pub fn enumerate_routes_from(
    network: &Network,
    start: &str,
    blocked: &BTreeSet<String>,
) -> Result<Vec<Route>, NetworkError> {
    network.ensure_valid()?;
    if !network.has_node(start) {
        return Err(NetworkError::UnknownNode(start.to_string()));
    }
    let mut adjacency: BTreeMap<&str, Vec<&Link>> = BTreeMap::new();
    for link in &network.links {
        adjacency.entry(link.a.as_str()).or_default().push(link);
        adjacency.entry(link.b.as_str()).or_default().push(link);
    }

    let mut routes = Vec::new();
    if start != network.sink {
        let mut visited: BTreeSet<&str> = blocked.iter().map(String::as_str).collect();
        visited.insert(start);
        let mut path = Vec::new();
        extend_paths(
            start,
            &network.sink,
            &adjacency,
            &mut visited,
            &mut path,
            &mut routes,
        );
    }
    if routes.is_empty() {
        return Err(NetworkError::UnreachableSink {
            from: start.to_string(),
            sink: network.sink.clone(),
        });
    }
    routes.sort();
    Ok(routes)
}

fn extend_paths<'a>(
    at: &'a str,
    sink: &str,
    adjacency: &BTreeMap<&'a str, Vec<&'a Link>>,
    visited: &mut BTreeSet<&'a str>,
    path: &mut Vec<LinkId>,
    out: &mut Vec<Route>,
) {
    let Some(links) = adjacency.get(at) else {
        return;
    };
    for link in links {
        let next = link.other_end(at).expect("adjacency lists incident links");
        if visited.contains(next) {
            continue;
        }
        path.push(link.id.clone());
        if next == sink {
            out.push(Route::new(path.clone()));
        } else {
            visited.insert(next);
            extend_paths(next, sink, adjacency, visited, path, out);
            visited.remove(next);
        }
        path.pop();
    }
}

/// The nine-node, ten-link network from A to I.
///
/// Links 3-8 form the chain C-D-E-F-G-H-I, link 9 joins C to I and link 10
/// joins E to I. Length ratios are relative to link 9.
pub fn figure1_network() -> Network {
    let spec: [(u32, &str, &str, f64); 10] = [
        (1, "A", "B", 0.66),
        (2, "B", "C", 0.66),
        (3, "C", "D", 0.20),
        (4, "D", "E", 0.20),
        (5, "E", "F", 0.20),
        (6, "F", "G", 0.20),
        (7, "G", "H", 0.20),
        (8, "H", "I", 0.20),
        (9, "C", "I", 1.0),
        (10, "E", "I", 0.50),
    ];
    Network {
        nodes: ["A", "B", "C", "D", "E", "F", "G", "H", "I"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        links: spec
            .iter()
            .map(|&(id, a, b, length_ratio)| Link {
                id: LinkId::from(id),
                a: a.to_string(),
                b: b.to_string(),
                length_ratio,
            })
            .collect(),
        source: "A".to_string(),
        sink: "I".to_string(),
    }
}
