use std::path::PathBuf;

use thiserror::Error;

use crate::xyinit::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("JSON error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    /// A file was readable but its contents do not follow the expected layout.
    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid genotype: {0}")]
    InvalidGenotype(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// The smallest table the configuration can produce does not fit on the page,
    /// or no fitting draw was found within the retry budget.
    #[error("configuration `{config}` is infeasible: {reason}")]
    Infeasible { config: String, reason: String },

    #[error("insufficient structure: found {found} divider(s) on the {axis} axis, need at least 2")]
    InsufficientStructure { axis: Axis, found: usize },

    #[error("image dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("objective `{0}` requires a discriminator")]
    MissingDiscriminator(&'static str),

    #[error("discriminator failed: {0}")]
    Discriminator(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
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
}
