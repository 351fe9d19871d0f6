//! Corpus model: samples, outcomes, text normalization, and import.
//!
//! A corpus is an ordered, immutable collection of [`Sample`]s with unique
//! ids. All text and slot values are normalized on the way in, so every
//! downstream comparison (`reference` vs `hypothesis`, outcome equality)
//! operates on canonical forms.

mod massive;
mod normalize;
mod outcome;

pub use massive::import_massive;
pub use normalize::{normalize_text, NormalizationPolicy};
pub use outcome::{outcome_equal, NluOutcome, SlotPair, Task};

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One utterance tracked through the back-transcription loop.
///
/// * `reference` — the original written utterance fed to TTS.
/// * `hypothesis` — what ASR heard back (absent until a run fills it in).
/// * `expected` — gold annotation for the utterance.
/// * `before` — the NLU prediction on `reference`.
/// * `after` — the NLU prediction on `hypothesis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub reference: String,
    #[serde(default)]
    pub hypothesis: Option<String>,
    pub expected: NluOutcome,
    #[serde(default)]
    pub before: Option<NluOutcome>,
    #[serde(default)]
    pub after: Option<NluOutcome>,
    /// Unknown fields survive a load/save round trip.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Sample {
    pub fn new(id: impl Into<String>, reference: impl Into<String>, expected: NluOutcome) -> Self {
        Sample {
            id: id.into(),
            reference: reference.into(),
            hypothesis: None,
            expected,
            before: None,
            after: None,
            extra: serde_json::Map::new(),
        }
    }

    /// Did back transcription change the text? `None` until a hypothesis exists.
    pub fn text_changed(&self) -> Option<bool> {
        self.hypothesis.as_ref().map(|h| *h != self.reference)
    }

    /// True once the sample carries everything evaluation needs.
    pub fn is_evaluated(&self) -> bool {
        self.hypothesis.is_some() && self.before.is_some() && self.after.is_some()
    }

    fn normalized(mut self, policy: &NormalizationPolicy) -> Sample {
        self.reference = normalize_text(&self.reference, policy);
        self.hypothesis = self.hypothesis.map(|h| normalize_text(&h, policy));
        self.expected = self.expected.normalized(policy);
        self.before = self.before.map(|o| o.normalized(policy));
        self.after = self.after.map(|o| o.normalized(policy));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidSample {
                id: self.id.clone(),
                reason: "empty id".into(),
            });
        }
        if self.reference.is_empty() {
            return Err(Error::InvalidSample {
                id: self.id.clone(),
                reason: "empty reference text".into(),
            });
        }
        if self.after.is_some() && self.hypothesis.is_none() {
            return Err(Error::InvalidSample {
                id: self.id.clone(),
                reason: "has an `after` outcome but no hypothesis".into(),
            });
        }
        Ok(())
    }
}

/// An ordered set of samples with unique ids, normalized under one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    samples: Vec<Sample>,
}

impl Corpus {
    /// Validates, normalizes and seals `samples`. Duplicate ids are
    /// reported with their position (1-based, like file lines).
    pub fn from_samples(samples: Vec<Sample>, policy: &NormalizationPolicy) -> Result<Corpus> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(samples.len());
        for (idx, sample) in samples.into_iter().enumerate() {
            let sample = sample.normalized(policy);
            sample.validate()?;
            if !seen.insert(sample.id.clone()) {
                return Err(Error::DuplicateId {
                    line: idx + 1,
                    id: sample.id,
                });
            }
            out.push(sample);
        }
        Ok(Corpus { samples: out })
    }

    /// Reads a JSON-lines corpus file. Blank lines are allowed; every other
    /// line must be a full sample record. Errors carry the line number.
    pub fn load(path: impl AsRef<Path>, policy: &NormalizationPolicy) -> Result<Corpus> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_jsonl(&raw, policy)
    }

    /// Parses JSON-lines text. Split out from [`Corpus::load`] so in-memory
    /// corpora and tests need no files.
    pub fn from_jsonl(text: &str, policy: &NormalizationPolicy) -> Result<Corpus> {
        let mut samples = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let sample: Sample = serde_json::from_str(line)
                .map_err(|e| Error::MalformedRecord { line: line_no, source: e })?;
            let sample = sample.normalized(policy);
            sample.validate()?;
            if !seen.insert(sample.id.clone()) {
                return Err(Error::DuplicateId {
                    line: line_no,
                    id: sample.id,
                });
            }
            samples.push(sample);
        }
        Ok(Corpus { samples })
    }

    /// Writes one JSON record per line, in corpus order. Loading the result
    /// back under the same policy reproduces this corpus exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for sample in &self.samples {
            let line = serde_json::to_string(sample).expect("samples always serialize");
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for sample in &self.samples {
            out.push_str(&serde_json::to_string(sample).expect("samples always serialize"));
            out.push('\n');
        }
        out
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}
