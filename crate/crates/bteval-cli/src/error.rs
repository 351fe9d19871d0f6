use std::fmt;
use std::path::Path;

/// A failed command: a stable machine-readable kind plus a human message.
///
/// Every failure path funnels through this type so scripts can match on
/// `error.kind` in the stderr JSON instead of parsing prose.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::new("config", message)
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::new("io", format!("i/o error on {}: {source}", path.display()))
    }

    /// The stderr line printed on failure.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<bteval_core::Error> for CliError {
    fn from(e: bteval_core::Error) -> Self {
        use bteval_core::Error as E;
        let kind = match &e {
            E::Io { .. } => "io",
            E::MalformedRecord { .. } => "malformed-record",
            E::MissingField { .. } => "missing-field",
            E::DuplicateId { .. } => "duplicate-id",
            E::InvalidSample { .. } => "invalid-sample",
            E::SlotAnnotation { .. } => "slot-annotation",
            E::OutcomeKindMismatch { .. } => "outcome-kind-mismatch",
            E::TaskMismatch { .. } => "task-mismatch",
            E::MissingOutcome { .. } => "missing-outcome",
            E::LabelTaskRequired { .. } => "label-task-required",
            E::EmptyMetricDomain { .. } => "empty-metric-domain",
            E::LengthMismatch { .. } => "length-mismatch",
            E::EmptyReference => "empty-reference",
            E::ParseEditOp { .. } => "parse-edit-op",
            E::ApplyEditOp { .. } => "apply-edit-op",
            E::Adapter { .. } => "adapter",
            E::Config(_) => "config",
            E::SingleClass { .. } => "single-class",
            E::NonConvergence { .. } => "non-convergence",
            E::UnchangedText { .. } => "unchanged-text",
            E::InvalidFraction(_) => "invalid-fraction",
            E::MissingVerdicts { .. } => "missing-verdicts",
            E::SheetKeyMismatch(_) => "sheet-key-mismatch",
            E::Csv(_) => "csv",
        };
        CliError::new(kind, e.to_string())
    }
}
