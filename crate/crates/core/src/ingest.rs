//! Parsing and shaping of link crossing histories, covariates and regional
//! incident data.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::netmodel::LinkId;

/// Name given to the leading constant column by [`with_intercept`].
pub const INTERCEPT: &str = "intercept";
/// Name given to the indicator column by [`expand_conditioning`].
pub const PRECEDING_INCIDENT: &str = "preceding_incident";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("row {row}, column {column}: {message}")]
    Field {
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("header must name a label column, a response column and covariates; got {0:?}")]
    BadHeader(Vec<String>),
    #[error("intercept already present")]
    InterceptPresent,
    #[error("indicator has length {found} but the dataset has {expected} rows")]
    LengthMismatch { expected: usize, found: usize },
    #[error("covariate {0} is not defined for this link")]
    MissingCovariate(String),
    #[error("covariate {0} does not appear in the regional dataset")]
    UnknownCovariate(String),
    #[error("covariate {name} is not finite")]
    NonFinite { name: String },
    #[error("malformed link record: {0}")]
    Record(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Past crossings of one link, oldest first; `true` marks a crossing that
/// experienced an incident.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossingHistory(Vec<bool>);

impl CrossingHistory {
    pub fn new(outcomes: Vec<bool>) -> Self {
        Self(outcomes)
    }

    /// `n` clean crossings.
    pub fn clear_run(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, IngestError> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(IngestError::Field {
                    row: i + 1,
                    column: "history".into(),
                    message: format!("outcome {other} is not 0 or 1"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.0
    }

    /// Number of crossings `n`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of crossings with an incident (the sum of the outcomes).
    pub fn incidents(&self) -> usize {
        self.0.iter().filter(|&&x| x).count()
    }

    pub fn with_appended(&self, outcome: bool) -> Self {
        let mut v = self.0.clone();
        v.push(outcome);
        Self(v)
    }
}

impl Serialize for CrossingHistory {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&x| u8::from(x)))
    }
}

impl<'de> Deserialize<'de> for CrossingHistory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        CrossingHistory::from_bits(&bits).map_err(serde::de::Error::custom)
    }
}

/// Covariate values for one observation, in dataset column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CovariateVector(pub Vec<f64>);

impl CovariateVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn with_appended(&self, value: f64) -> Self {
        let mut v = self.0.clone();
        v.push(value);
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalRecord {
    pub label: String,
    pub y: bool,
    pub z: CovariateVector,
}

/// Region-wide incident outcomes with their covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalDataset {
    pub label_column: String,
    pub response_column: String,
    pub covariate_names: Vec<String>,
    pub rows: Vec<RegionalRecord>,
}

impl RegionalDataset {
    /// Covariate dimension (including the intercept when present).
    pub fn dim(&self) -> usize {
        self.covariate_names.len()
    }

    /// Number of rows `s`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_intercept(&self) -> bool {
        self.covariate_names.first().map(String::as_str) == Some(INTERCEPT)
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.y).count()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.z.0[index]).collect()
    }

    /// Serializes back to CSV with the same header layout `parse_regional_csv` reads.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.label_column.clone(), self.response_column.clone()];
        header.extend(self.covariate_names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.label.clone(), u8::from(row.y).to_string()];
            rec.extend(row.z.0.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Parses regional incident data.
///
/// The first column is the row label, the second the 0/1 response, and every
/// further column a covariate in header order. No intercept is added.
pub fn parse_regional_csv(text: &str) -> Result<RegionalDataset, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header.iter().any(String::is_empty) {
        return Err(IngestError::BadHeader(header));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(IngestError::Ragged {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let y = match &record[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(IngestError::Field {
                    row,
                    column: header[1].clone(),
                    message: format!("response {other:?} is not 0 or 1"),
                })
            }
        };
        let z = header[2..]
            .iter()
            .zip(record.iter().skip(2))
            .map(|(name, field)| {
                let v: f64 = field.parse().map_err(|_| IngestError::Field {
                    row,
                    column: name.clone(),
                    message: format!("{field:?} is not a number"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(IngestError::Field {
                        row,
                        column: name.clone(),
                        message: format!("{field:?} is not finite"),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(RegionalRecord {
            label: record[0].to_string(),
            y,
            z: CovariateVector(z),
        });
    }
    Ok(RegionalDataset {
        label_column: header[0].clone(),
        response_column: header[1].clone(),
        covariate_names: header[2..].to_vec(),
        rows,
    })
}

/// Prepends a constant-one column to every covariate vector.
pub fn with_intercept(data: &RegionalDataset) -> Result<RegionalDataset, IngestError> {
    if data.has_intercept() {
        return Err(IngestError::InterceptPresent);
    }
    let mut out = data.clone();
    out.covariate_names.insert(0, INTERCEPT.to_string());
    for row in &mut out.rows {
        row.z.0.insert(0, 1.0);
    }
    Ok(out)
}

/// Appends a 0/1 column marking rows whose preceding link had an incident.
pub fn expand_conditioning(
    data: &RegionalDataset,
    preceded_by_incident: &[bool],
) -> Result<RegionalDataset, IngestError> {
    if preceded_by_incident.len() != data.len() {
        return Err(IngestError::LengthMismatch {
            expected: data.len(),
            found: preceded_by_incident.len(),
        });
    }
    let mut out = data.clone();
    out.covariate_names.push(PRECEDING_INCIDENT.to_string());
    for (row, &flag) in out.rows.iter_mut().zip(preceded_by_incident) {
        row.z.0.push(if flag { 1.0 } else { 0.0 });
    }
    Ok(out)
}

/// Per-link input document: crossing history and named covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub link: LinkId,
    pub history: CrossingHistory,
    #[serde(default)]
    pub covariates: BTreeMap<String, f64>,
}

impl LinkRecord {
    /// Orders this record's covariates to match `data`'s columns. The
    /// intercept and conditioning indicator columns are not looked up by name:
    /// the intercept is filled with 1 and the indicator is left for
    /// the caller to append.
    pub fn covariate_vector(&self, data: &RegionalDataset) -> Result<CovariateVector, IngestError> {
        for (name, v) in &self.covariates {
            if !v.is_finite() {
                return Err(IngestError::NonFinite { name: name.clone() });
            }
            if !data.covariate_names.iter().any(|c| c == name) {
                return Err(IngestError::UnknownCovariate(name.clone()));
            }
        }
        data.covariate_names
            .iter()
            .filter(|name| name.as_str() != PRECEDING_INCIDENT)
            .map(|name| {
                if name == INTERCEPT {
                    Ok(1.0)
                } else {
                    self.covariates
                        .get(name)
                        .copied()
                        .ok_or_else(|| IngestError::MissingCovariate(name.clone()))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(CovariateVector)
    }
}

/// Parses one link record or an array of them.
pub fn parse_link_records(text: &str) -> Result<Vec<LinkRecord>, IngestError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(LinkRecord),
        Many(Vec<LinkRecord>),
    }
    match serde_json::from_str::<OneOrMany>(text) {
        Ok(OneOrMany::One(r)) => Ok(vec![r]),
        Ok(OneOrMany::Many(v)) => Ok(v),
        // untagged hides the cause; retry as a single record for a useful message
        Err(_) => serde_json::from_str::<LinkRecord>(text)
            .map(|r| vec![r])
            .map_err(|e| IngestError::Record(e.to_string())),
    }
}
