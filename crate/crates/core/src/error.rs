use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// One or more invariants of a parameter set do not hold.
    #[error("invalid {what}: {}", .violations.join("; "))]
    Validation {
        what: &'static str,
        violations: Vec<String>,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("insufficient data: {rows} rows for {cols} unknowns")]
    InsufficientData { rows: usize, cols: usize },

    #[error("degenerate dataset: all joint-angle rows are identical")]
    DegenerateDataset,

    #[error("normal matrix is singular (rank deficient); use a ridge parameter > 0")]
    Singular,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite dynamics at tick {tick}")]
    NonFinite { tick: usize },

    #[error("record too short: {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },

    #[error("records do not share a schema; differing fields: {}", .fields.join(", "))]
    SchemaMismatch { fields: Vec<String> },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Field { path: String, message: String },

    #[error("malformed record: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Collects invariant violations and turns them into a single error.
#[derive(Debug, Default)]
pub(crate) struct Violations(Vec<String>);

impl Violations {
    pub(crate) fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    pub(crate) fn finish(self, what: &'static str) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation {
                what,
                violations: self.0,
            })
        }
    }
}
