//! Change categorization and robustness metrics.
//!
//! A back-transcribed sample carries three outcomes: `expected` (gold),
//! `before` (prediction on the written reference) and `after` (prediction
//! on what survived the speech loop). Comparing them tells us whether the
//! recognition errors *changed the model's mind*, and whether that change
//! hurt. The six metric variants differ only in which samples they count
//! and what they give credit for, expressed here as a
//! [`RobustnessPolicy`]: a choice of how to treat incorrect-to-incorrect
//! changes and incorrect-to-correct changes.

mod fscore;
mod report;
mod standard;

pub use fscore::{fscore_component_delta, Direction, LabelDelta};
pub use report::{category_counts_markdown, metrics_csv, metrics_markdown, standard_markdown};
pub use standard::{standard_metrics, MicroF1, StandardMetrics};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{outcome_equal, Corpus, NluOutcome, Sample};
use crate::error::{Error, Result};

/// How one sample's prediction moved once recognition errors were added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChangeCategory {
    /// Correct before, incorrect after: the errors broke the prediction.
    CorrectToIncorrect,
    /// Incorrect before and after, but the predictions differ.
    IncorrectToIncorrect,
    /// Incorrect before, correct after: the errors accidentally fixed it.
    IncorrectToCorrect,
    /// The prediction did not move at all (correct or not).
    Constant,
}

impl ChangeCategory {
    pub const ALL: [ChangeCategory; 4] = [
        ChangeCategory::CorrectToIncorrect,
        ChangeCategory::IncorrectToIncorrect,
        ChangeCategory::IncorrectToCorrect,
        ChangeCategory::Constant,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ChangeCategory::CorrectToIncorrect => "correct-to-incorrect",
            ChangeCategory::IncorrectToIncorrect => "incorrect-to-incorrect",
            ChangeCategory::IncorrectToCorrect => "incorrect-to-correct",
            ChangeCategory::Constant => "constant",
        }
    }
}

impl fmt::Display for ChangeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn evaluated_outcomes(sample: &Sample) -> Result<(&NluOutcome, &NluOutcome, &NluOutcome)> {
    let before = sample.before.as_ref().ok_or(Error::MissingOutcome {
        id: sample.id.clone(),
        field: "before",
    })?;
    let after = sample.after.as_ref().ok_or(Error::MissingOutcome {
        id: sample.id.clone(),
        field: "after",
    })?;
    Ok((&sample.expected, before, after))
}

/// Buckets a sample by how its prediction moved.
///
/// The four categories partition all samples: exactly one always applies.
/// Requires `before` and `after`; categorization is independent of whether
/// the *text* changed (an unchanged prediction is `Constant` even if the
/// hypothesis drifted).
pub fn categorize(sample: &Sample) -> Result<ChangeCategory> {
    let (expected, before, after) = evaluated_outcomes(sample)?;
    if outcome_equal(before, after)? {
        return Ok(ChangeCategory::Constant);
    }
    if outcome_equal(before, expected)? {
        return Ok(ChangeCategory::CorrectToIncorrect);
    }
    if outcome_equal(after, expected)? {
        return Ok(ChangeCategory::IncorrectToCorrect);
    }
    Ok(ChangeCategory::IncorrectToIncorrect)
}

/// Per-category sample counts, split by whether the text changed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub correct_to_incorrect: usize,
    pub incorrect_to_incorrect: usize,
    pub incorrect_to_correct: usize,
    /// Unchanged prediction on changed text.
    pub constant_changed_text: usize,
    /// Unchanged prediction on text the loop returned verbatim.
    pub constant_unchanged_text: usize,
}

impl CategoryCounts {
    pub fn constant(&self) -> usize {
        self.constant_changed_text + self.constant_unchanged_text
    }

    pub fn total(&self) -> usize {
        self.correct_to_incorrect
            + self.incorrect_to_incorrect
            + self.incorrect_to_correct
            + self.constant()
    }

    pub fn get(&self, category: ChangeCategory) -> usize {
        match category {
            ChangeCategory::CorrectToIncorrect => self.correct_to_incorrect,
            ChangeCategory::IncorrectToIncorrect => self.incorrect_to_incorrect,
            ChangeCategory::IncorrectToCorrect => self.incorrect_to_correct,
            ChangeCategory::Constant => self.constant(),
        }
    }
}

/// Tallies [`categorize`] over a whole corpus. Every sample must be fully
/// evaluated; the counts always sum to the corpus size.
pub fn category_counts(corpus: &Corpus) -> Result<CategoryCounts> {
    let mut counts = CategoryCounts::default();
    for sample in corpus {
        let changed = sample.text_changed().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "hypothesis",
        })?;
        match categorize(sample)? {
            ChangeCategory::CorrectToIncorrect => counts.correct_to_incorrect += 1,
            ChangeCategory::IncorrectToIncorrect => counts.incorrect_to_incorrect += 1,
            ChangeCategory::IncorrectToCorrect => counts.incorrect_to_correct += 1,
            ChangeCategory::Constant => {
                if changed {
                    counts.constant_changed_text += 1;
                } else {
                    counts.constant_unchanged_text += 1;
                }
            }
        }
    }
    Ok(counts)
}

/// How a metric treats incorrect-to-incorrect prediction changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItoITreatment {
    /// Counts against the model: a changed answer is a broken answer.
    Negative,
    /// Dropped from the denominator: the model was already wrong.
    Irrelevant,
}

/// How a metric treats incorrect-to-correct prediction changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItoCTreatment {
    /// Counts against the model: any change is instability.
    Negative,
    /// Dropped from the denominator: accidental fixes say nothing.
    Irrelevant,
    /// Counts in the model's favour: ending up correct is what matters.
    Positive,
}

/// A full interpretation stance: what do prediction changes on already
/// incorrect samples mean? The six supported metrics are exactly the six
/// combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustnessPolicy {
    pub ito_i: ItoITreatment,
    pub ito_c: ItoCTreatment,
}

impl RobustnessPolicy {
    /// Does this policy score `category` as damage? Used when labelling
    /// training data for the error model.
    pub fn is_negative(&self, category: ChangeCategory) -> bool {
        match category {
            ChangeCategory::CorrectToIncorrect => true,
            ChangeCategory::Constant => false,
            ChangeCategory::IncorrectToIncorrect => self.ito_i == ItoITreatment::Negative,
            ChangeCategory::IncorrectToCorrect => self.ito_c == ItoCTreatment::Negative,
        }
    }

    pub fn metric_id(&self) -> MetricId {
        use ItoCTreatment as C;
        use ItoITreatment as I;
        match (self.ito_i, self.ito_c) {
            (I::Negative, C::Negative) => MetricId::R123,
            (I::Irrelevant, C::Negative) => MetricId::R13,
            (I::Negative, C::Irrelevant) => MetricId::R12,
            (I::Irrelevant, C::Irrelevant) => MetricId::R1,
            (I::Negative, C::Positive) => MetricId::R123Plus,
            (I::Irrelevant, C::Positive) => MetricId::R13Plus,
        }
    }
}

/// The six robustness metric variants.
///
/// Naming: the digits say which kinds of prediction change count as
/// damage (1 = correct-to-incorrect, 2 = incorrect-to-incorrect,
/// 3 = incorrect-to-correct); a trailing `+` credits changes that end up
/// correct instead of merely excusing them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricId {
    R123,
    R13,
    R12,
    R1,
    R123Plus,
    R13Plus,
}

impl MetricId {
    pub const ALL: [MetricId; 6] = [
        MetricId::R123,
        MetricId::R13,
        MetricId::R12,
        MetricId::R1,
        MetricId::R123Plus,
        MetricId::R13Plus,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            MetricId::R123 => "R123",
            MetricId::R13 => "R13",
            MetricId::R12 => "R12",
            MetricId::R1 => "R1",
            MetricId::R123Plus => "R123+",
            MetricId::R13Plus => "R13+",
        }
    }

    pub fn policy(&self) -> RobustnessPolicy {
        use ItoCTreatment as C;
        use ItoITreatment as I;
        let (ito_i, ito_c) = match self {
            MetricId::R123 => (I::Negative, C::Negative),
            MetricId::R13 => (I::Irrelevant, C::Negative),
            MetricId::R12 => (I::Negative, C::Irrelevant),
            MetricId::R1 => (I::Irrelevant, C::Irrelevant),
            MetricId::R123Plus => (I::Negative, C::Positive),
            MetricId::R13Plus => (I::Irrelevant, C::Positive),
        };
        RobustnessPolicy { ito_i, ito_c }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R123" => Ok(MetricId::R123),
            "R13" => Ok(MetricId::R13),
            "R12" => Ok(MetricId::R12),
            "R1" => Ok(MetricId::R1),
            "R123+" => Ok(MetricId::R123Plus),
            "R13+" => Ok(MetricId::R13Plus),
            other => Err(Error::Config(format!(
                "unknown metric {other:?} (expected one of R123, R13, R12, R1, R123+, R13+)"
            ))),
        }
    }
}

/// One computed metric: `value = numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: MetricId,
    pub numerator: usize,
    pub denominator: usize,
    pub value: f64,
}

/// Computes one robustness metric over the corpus.
///
/// Only samples whose text actually changed can witness (non-)robustness,
/// so every variant restricts itself to `hypothesis != reference`; the
/// variants then differ in which of those samples stay in the denominator
/// and what the numerator credits. An empty denominator is an error —
/// there is no meaningful value to report, and silently returning 0 or 1
/// would corrupt comparisons.
pub fn robustness_metric(corpus: &Corpus, metric: MetricId) -> Result<MetricResult> {
    let mut numerator = 0usize;
    let mut denominator = 0usize;
    for sample in corpus {
        let changed = sample.text_changed().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "hypothesis",
        })?;
        let (expected, before, after) = evaluated_outcomes(sample)?;
        if !changed {
            continue;
        }
        let before_ok = outcome_equal(before, expected)?;
        let after_ok = outcome_equal(after, expected)?;
        let unchanged = outcome_equal(before, after)?;

        let in_domain = match metric {
            MetricId::R123 | MetricId::R123Plus => true,
            MetricId::R13 | MetricId::R13Plus => before_ok || after_ok,
            MetricId::R12 => !(!before_ok && after_ok),
            MetricId::R1 => before_ok,
        };
        if !in_domain {
            continue;
        }
        denominator += 1;
        let credited = match metric {
            MetricId::R123Plus | MetricId::R13Plus => unchanged || after_ok,
            _ => unchanged,
        };
        if credited {
            numerator += 1;
        }
    }
    if denominator == 0 {
        return Err(Error::EmptyMetricDomain { metric: metric.label().to_string() });
    }
    Ok(MetricResult {
        metric,
        numerator,
        denominator,
        value: numerator as f64 / denominator as f64,
    })
}

/// All six metrics in [`MetricId::ALL`] order.
pub fn all_robustness_metrics(corpus: &Corpus) -> Result<Vec<MetricResult>> {
    MetricId::ALL.iter().map(|m| robustness_metric(corpus, *m)).collect()
}
