use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, NormalizationPolicy};
use crate::error::{Error, Result};

/// The three prediction tasks an NLU model can be probed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Domain,
    Intent,
    Slots,
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::Domain => "domain",
            Task::Intent => "intent",
            Task::Slots => "slots",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "domain" => Ok(Task::Domain),
            "intent" => Ok(Task::Intent),
            "slots" => Ok(Task::Slots),
            other => Err(Error::Config(format!(
                "unknown task {other:?} (expected domain, intent or slots)"
            ))),
        }
    }
}

/// One filled slot: `[time : 9 am]` becomes `name = "time", value = "9 am"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotPair {
    pub name: String,
    pub value: String,
}

impl SlotPair {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        SlotPair {
            name: name.into(),
            value: value.into(),
        }
    }
}

/// A model prediction (or gold annotation) for one of the three tasks.
///
/// Slot outcomes are sets: ordering and duplication in the source JSON do
/// not affect equality, and serialization always emits slots sorted by
/// `(name, value)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum NluOutcome {
    Domain { label: String },
    Intent { label: String },
    Slots { slots: BTreeSet<SlotPair> },
}

impl NluOutcome {
    pub fn domain(label: impl Into<String>) -> Self {
        NluOutcome::Domain { label: label.into() }
    }

    pub fn intent(label: impl Into<String>) -> Self {
        NluOutcome::Intent { label: label.into() }
    }

    pub fn slots<I: IntoIterator<Item = SlotPair>>(pairs: I) -> Self {
        NluOutcome::Slots {
            slots: pairs.into_iter().collect(),
        }
    }

    pub fn task(&self) -> Task {
        match self {
            NluOutcome::Domain { .. } => Task::Domain,
            NluOutcome::Intent { .. } => Task::Intent,
            NluOutcome::Slots { .. } => Task::Slots,
        }
    }

    /// The class label, for label-valued outcomes.
    pub fn label(&self) -> Option<&str> {
        match self {
            NluOutcome::Domain { label } | NluOutcome::Intent { label } => Some(label),
            NluOutcome::Slots { .. } => None,
        }
    }

    pub fn slot_set(&self) -> Option<&BTreeSet<SlotPair>> {
        match self {
            NluOutcome::Slots { slots } => Some(slots),
            _ => None,
        }
    }

    /// Normalizes slot *values* with `policy`; labels and slot names are
    /// model vocabulary, not speech, and pass through untouched.
    pub fn normalized(&self, policy: &NormalizationPolicy) -> NluOutcome {
        match self {
            NluOutcome::Slots { slots } => NluOutcome::Slots {
                slots: slots
                    .iter()
                    .map(|p| SlotPair::new(p.name.clone(), normalize_text(&p.value, policy)))
                    .collect(),
            },
            other => other.clone(),
        }
    }
}

/// Equality between two outcomes of the same kind.
///
/// Comparing outcomes of different kinds is a pipeline bug, not a
/// legitimate "not equal", so it is an error rather than `false`.
pub fn outcome_equal(left: &NluOutcome, right: &NluOutcome) -> Result<bool> {
    if left.task() != right.task() {
        return Err(Error::OutcomeKindMismatch {
            left: left.task(),
            right: right.task(),
        });
    }
    Ok(left == right)
}
