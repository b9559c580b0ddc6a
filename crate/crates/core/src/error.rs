//! Crate-wide error type.
//!
//! One enum covers the whole pipeline; variants carry enough context (line
//! numbers, attribute names, stratum keys) that a CLI user can act on the
//! message without reading source code. Recoverable conditions that callers
//! are expected to branch on (parse failures during a run, unmatched strata)
//! are modelled as data in their modules' return types instead.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- I/O and serialization ------------------------------------------
    // The cause is baked into the message rather than exposed through
    // `source()`: every variant's Display is self-contained, so callers that
    // print an error chain (anyhow's `{:#}`) don't repeat the cause.
    #[error("i/o error: {0}")]
    Io(std::io::Error),

    #[error("json error: {0}")]
    Json(serde_json::Error),

    #[error("{path}: {cause}")]
    File { path: String, cause: Box<Error> },

    // ---- user pool -------------------------------------------------------
    #[error("line {line}: {message}")]
    Ingest { line: usize, message: String },

    #[error("duplicate user {user_id} on platform {platform}: lines {first} and {second}")]
    DuplicateUser {
        platform: String,
        user_id: String,
        first: usize,
        second: usize,
    },

    #[error("attribute {0:?} is not registered in the schema")]
    UnknownAttribute(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("no votes for attribute {0:?}")]
    NoVotes(String),

    #[error("vote targets attribute {got:?} but {expected:?} was requested")]
    VoteAttributeMismatch { expected: String, got: String },

    #[error("no user in the pool carries a label for {0:?}")]
    NoLabeledUsers(String),

    // ---- synthesis -------------------------------------------------------
    #[error("contingency table error: {0}")]
    Table(String),

    #[error("marginal targets error: {0}")]
    Targets(String),

    #[error("income mixture error: {0}")]
    Income(String),

    #[error("regional allocation error: {0}")]
    Regional(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error(
        "stratum {stratum} has {available} pool users but {requested} were requested \
         (without replacement)"
    )]
    StratumExhausted {
        stratum: String,
        available: usize,
        requested: usize,
    },

    // ---- scenario --------------------------------------------------------
    #[error("questionnaire error: {0}")]
    Questionnaire(String),

    #[error("scenario config error: {0}")]
    Scenario(String),

    // ---- behavior --------------------------------------------------------
    #[error("backend error: {0}")]
    Backend(String),

    #[error("run aborted: {0}")]
    RunAborted(String),

    // ---- evaluation ------------------------------------------------------
    #[error("metric error: {0}")]
    Metric(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Error {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Error {
        Error::Json(e)
    }
}

impl Error {
    /// Wrap an error with the path of the file being processed.
    pub fn in_file(self, path: impl AsRef<std::path::Path>) -> Error {
        Error::File {
            path: path.as_ref().display().to_string(),
            cause: Box::new(self),
        }
    }
}
