use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),

    #[error("tuple ids must be strictly increasing (tid {tid} follows {prev})")]
    TidOrder { prev: u64, tid: u64 },

    #[error("rule line {line}: unknown attribute `{name}`")]
    UnknownAttribute { line: usize, name: String },

    #[error("rule line {line}: unsupported DC form: {detail}")]
    UnsupportedDc { line: usize, detail: String },

    #[error("rule line {line}: {message}")]
    RuleSyntax { line: usize, message: String },

    #[error("gamma layout mismatch: {left} vs {right} values")]
    LayoutMismatch { left: usize, right: usize },

    #[error("f-score needs at least one weight")]
    EmptyWeights,

    #[error("weight aggregation needs a positive total tuple count")]
    ZeroCounts,

    #[error("cannot split {tuples} tuples into {parts} parts")]
    InvalidPartCount { parts: usize, tuples: usize },

    #[error("invalid error spec: {0}")]
    InvalidErrorSpec(String),

    #[error("cannot inject errors: {0}")]
    InfeasibleInjection(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
