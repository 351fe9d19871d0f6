use std::path::PathBuf;

use crate::corpus::Task;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {source}")]
    MalformedRecord {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("line {line}: duplicate sample id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("sample {id:?}: {reason}")]
    InvalidSample { id: String, reason: String },

    #[error("line {line}: bad slot annotation: {reason}")]
    SlotAnnotation { line: usize, reason: String },

    #[error("cannot compare {left} outcome with {right} outcome")]
    OutcomeKindMismatch { left: Task, right: Task },

    #[error("sample {id:?} has a {found} outcome where {expected} was requested")]
    TaskMismatch {
        id: String,
        expected: Task,
        found: Task,
    },

    #[error("sample {id:?} is missing `{field}`, which this operation requires")]
    MissingOutcome { id: String, field: &'static str },

    #[error("sample {id:?} carries slot outcomes; per-label score deltas need a label task")]
    LabelTaskRequired { id: String },

    #[error("{metric} is undefined on this corpus: its domain is empty")]
    EmptyMetricDomain { metric: String },

    #[error("reference and hypothesis lists differ in length ({references} vs {hypotheses})")]
    LengthMismatch {
        references: usize,
        hypotheses: usize,
    },

    #[error("word error rate is undefined: references contain zero tokens")]
    EmptyReference,

    #[error("cannot parse edit operation {input:?}: {reason}")]
    ParseEditOp { input: String, reason: String },

    #[error("cannot apply edit operation `{op}`: {reason}")]
    ApplyEditOp { op: String, reason: String },

    #[error("{adapter} adapter: {message}")]
    Adapter { adapter: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data contains a single class (every label is {label})")]
    SingleClass { label: u8 },

    #[error("training did not converge in {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("sample {id:?} has identical reference and hypothesis; it carries no recognition error")]
    UnchangedText { id: String },

    #[error("fraction {0} is outside [0, 1]")]
    InvalidFraction(f64),

    #[error("annotation sheet rows {ids:?} have no verdict")]
    MissingVerdicts { ids: Vec<String> },

    #[error("annotation sheet and key disagree: {0}")]
    SheetKeyMismatch(String),

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
