use std::fmt;

use routerisk_core::decision::DecisionError;
use routerisk_core::netmodel::NetworkError;
use routerisk_core::pipeline::PipelineError;
use routerisk_core::sequential::SessionError;

/// Exit 1 for bad input, 2 when the computation itself fails.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Pipeline(_) => 2,
        }
    }

    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Pipeline(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ingest(_) => CliError::User(e.to_string()),
            other => CliError::Pipeline(other.to_string()),
        }
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        match &e {
            DecisionError::MissingProbability(_)
            | DecisionError::ProbabilityOutOfRange { .. }
            | DecisionError::UnknownLink(_)
            | DecisionError::InvalidUtility(_)
            | DecisionError::Network(NetworkError::Invalid(_) | NetworkError::Parse(_)) => CliError::User(e.to_string()),
            _ => CliError::Pipeline(e.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Decision(d) => d.into(),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}
