//! Bundled reference data: the twelve-bridge regional table, the A-to-I
//! network and the "new bridge" link record.

use crate::ingest::{parse_link_records, parse_regional_csv, LinkRecord, RegionalDataset};
use crate::netmodel::LinkId;
use crate::decision::LinkProbabilities;

pub use crate::netmodel::figure1_network;

/// Historical incidents on twelve bridges with distances (miles) to four landmarks.
pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");

/// Link 9: four clean crossings, one mile from every landmark.
pub const NEW_BRIDGE_JSON: &str = include_str!("../fixtures/new_bridge.json");

/// Per-link probabilities obtained by scaling p(9) = 0.306 by link length.
pub const SCALED_MARGINALS_JSON: &str = include_str!("../fixtures/marginals_5_2_1.json");

pub fn table1() -> RegionalDataset {
    parse_regional_csv(TABLE1_CSV).expect("bundled table parses")
}

pub fn new_bridge() -> LinkRecord {
    parse_link_records(NEW_BRIDGE_JSON)
        .expect("bundled record parses")
        .remove(0)
}

pub fn scaled_marginals() -> LinkProbabilities {
    serde_json::from_str(SCALED_MARGINALS_JSON).expect("bundled marginals parse")
}

/// Id of the calibration link whose length ratio is 1.
pub fn reference_link() -> LinkId {
    LinkId::from(9)
}
