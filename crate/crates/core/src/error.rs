use std::path::PathBuf;

use thiserror::Error;

use crate::model::Platform;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    /// A manifest, ruleset, matrix or flag is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("not a DDP: {0}")]
    NotADdp(String),

    #[error("ambiguous platform: tree matches {} equally", join_platforms(.0))]
    AmbiguousPlatform(Vec<Platform>),

    #[error("invalid HAR: {0}")]
    InvalidHar(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("archive error: {0}")]
    Archive(String),
}

fn join_platforms(platforms: &[Platform]) -> String {
    platforms
        .iter()
        .map(|p| p.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by configuration files or flags rather than inputs.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
