//! Blind listening audit for synthesized speech.
//!
//! After a back-transcription run, some hypotheses differ from their
//! references. Either the synthesis mangled the prompt or the recognizer
//! misheard it; to apportion blame, a human listens to the synthesized
//! audio and judges which of the two texts it actually says. This module
//! draws the sample, blinds the presentation order, and scores the filled
//! sheet.
//!
//! The workflow is split into two CSV files so the annotator never sees
//! the answer key: the sheet (`id,audio,option_1,option_2,verdict`) goes
//! to the annotator, the key (`id,original_position`) stays behind.
//! [`compute_resemblance`] joins them back together and reports the
//! fraction of readings judged at least as close to the original prompt
//! as to its re-transcription.

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// An annotator's judgement of which presented text the audio says.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The audio matches the text shown first.
    Option1,
    /// The audio matches the text shown second.
    Option2,
    /// The audio is equally compatible with both texts.
    Both,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Option1 => "option_1",
            Verdict::Option2 => "option_2",
            Verdict::Both => "both",
        }
    }

    /// The same judgement under a swapped presentation order.
    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::Option1 => Verdict::Option2,
            Verdict::Option2 => Verdict::Option1,
            Verdict::Both => Verdict::Both,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    /// Accepts the canonical names plus the shorthand an annotator is
    /// likely to type: `1`, `2`, any capitalization, stray spaces.
    fn from_str(s: &str) -> std::result::Result<Verdict, String> {
        let folded = s.trim().to_ascii_lowercase().replace(' ', "_");
        match folded.as_str() {
            "1" | "option_1" => Ok(Verdict::Option1),
            "2" | "option_2" => Ok(Verdict::Option2),
            "both" => Ok(Verdict::Both),
            _ => Err(format!("unrecognized verdict {s:?} (want 1, 2, or both)")),
        }
    }
}

/// One audited sample: two candidate texts in blinded order plus the
/// hidden answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetRow {
    pub id: String,
    /// Where the annotator finds the audio for this sample.
    pub audio: String,
    pub option_1: String,
    pub option_2: String,
    /// Which option holds the reference text: 1 or 2. Never rendered on
    /// the annotator-facing sheet.
    pub original_position: u8,
    pub verdict: Option<Verdict>,
}

/// A blinded audit sheet: annotator-facing rows plus the hidden key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationSheet {
    pub rows: Vec<SheetRow>,
}

/// Draws a blinded audit sheet from the corpus.
///
/// Only samples whose hypothesis differs from the reference are eligible
/// (identical pairs have nothing to audit). `⌈fraction · eligible⌉` rows
/// are drawn without replacement, kept in corpus order, and each row's
/// presentation order is decided by a fair coin. Everything is driven by
/// `seed`, so a fixed `(corpus, fraction, seed)` reproduces the sheet
/// byte for byte.
pub fn make_annotation_sheet(corpus: &Corpus, fraction: f64, seed: u64) -> Result<AnnotationSheet> {
    if !(0.0..=1.0).contains(&fraction) || fraction.is_nan() {
        return Err(Error::InvalidFraction(fraction));
    }

    let eligible: Vec<_> = corpus
        .iter()
        .filter(|s| s.text_changed() == Some(true))
        .collect();
    let wanted = ((fraction * eligible.len() as f64).ceil() as usize).min(eligible.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample_indices(&mut rng, eligible.len(), wanted).into_vec();
    picked.sort_unstable();

    let rows = picked
        .into_iter()
        .map(|i| {
            let sample = eligible[i];
            let hypothesis = sample.hypothesis.as_deref().expect("eligible rows have hypotheses");
            let reference_first = rng.random_bool(0.5);
            let (option_1, option_2, original_position) = if reference_first {
                (sample.reference.clone(), hypothesis.to_string(), 1)
            } else {
                (hypothesis.to_string(), sample.reference.clone(), 2)
            };
            SheetRow {
                id: sample.id.clone(),
                audio: format!("{}.wav", sample.id),
                option_1,
                option_2,
                original_position,
                verdict: None,
            }
        })
        .collect();
    Ok(AnnotationSheet { rows })
}

impl AnnotationSheet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The annotator-facing CSV. The verdict column ships empty and is
    /// filled in by hand.
    pub fn sheet_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["id", "audio", "option_1", "option_2", "verdict"])
            .expect("writing to memory cannot fail");
        for row in &self.rows {
            let verdict = row.verdict.map(Verdict::as_str).unwrap_or("");
            wtr.write_record([
                row.id.as_str(),
                row.audio.as_str(),
                row.option_1.as_str(),
                row.option_2.as_str(),
                verdict,
            ])
            .expect("writing to memory cannot fail");
        }
        let bytes = wtr.into_inner().expect("writing to memory cannot fail");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    /// The hidden key CSV, kept away from the annotator.
    pub fn key_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["id", "original_position"])
            .expect("writing to memory cannot fail");
        for row in &self.rows {
            wtr.write_record([row.id.as_str(), &row.original_position.to_string()])
                .expect("writing to memory cannot fail");
        }
        let bytes = wtr.into_inner().expect("writing to memory cannot fail");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    pub fn save(&self, sheet_path: impl AsRef<Path>, key_path: impl AsRef<Path>) -> Result<()> {
        let sheet_path = sheet_path.as_ref();
        let key_path = key_path.as_ref();
        fs::write(sheet_path, self.sheet_csv()).map_err(|e| Error::io(sheet_path, e))?;
        fs::write(key_path, self.key_csv()).map_err(|e| Error::io(key_path, e))
    }

    /// Rejoins a (possibly filled) sheet with its key.
    ///
    /// The two files must list exactly the same ids in the same order; any
    /// disagreement means the annotator shuffled rows or the files were
    /// mixed up, and scoring them would silently miscount.
    pub fn from_csv_pair(sheet: impl Read, key: impl Read) -> Result<AnnotationSheet> {
        let mut sheet_rdr = csv::Reader::from_reader(sheet);
        let mut rows = Vec::new();
        for record in sheet_rdr.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("").to_string();
            if record.len() != 5 {
                return Err(Error::SheetKeyMismatch(format!(
                    "sheet row {} has {} fields, want 5",
                    rows.len() + 1,
                    record.len()
                )));
            }
            let raw_verdict = field(4);
            let verdict = if raw_verdict.trim().is_empty() {
                None
            } else {
                Some(raw_verdict.parse::<Verdict>().map_err(Error::Config)?)
            };
            rows.push(SheetRow {
                id: field(0),
                audio: field(1),
                option_1: field(2),
                option_2: field(3),
                original_position: 0,
                verdict,
            });
        }

        let mut key_rdr = csv::Reader::from_reader(key);
        let mut positions = Vec::new();
        for record in key_rdr.records() {
            let record = record?;
            let id = record.get(0).unwrap_or("").to_string();
            let position: u8 = record
                .get(1)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| {
                    Error::SheetKeyMismatch(format!(
                        "key row for {id:?} has a non-numeric position"
                    ))
                })?;
            if position != 1 && position != 2 {
                return Err(Error::SheetKeyMismatch(format!(
                    "key row for {id:?} has position {position}, want 1 or 2"
                )));
            }
            positions.push((id, position));
        }

        if rows.len() != positions.len() {
            return Err(Error::SheetKeyMismatch(format!(
                "sheet has {} rows but key has {}",
                rows.len(),
                positions.len()
            )));
        }
        for (row, (id, position)) in rows.iter_mut().zip(positions) {
            if row.id != id {
                return Err(Error::SheetKeyMismatch(format!(
                    "sheet lists {:?} where key lists {id:?}",
                    row.id
                )));
            }
            row.original_position = position;
        }
        Ok(AnnotationSheet { rows })
    }

    pub fn load(sheet_path: impl AsRef<Path>, key_path: impl AsRef<Path>) -> Result<AnnotationSheet> {
        let sheet_path = sheet_path.as_ref();
        let key_path = key_path.as_ref();
        let sheet = fs::File::open(sheet_path).map_err(|e| Error::io(sheet_path, e))?;
        let key = fs::File::open(key_path).map_err(|e| Error::io(key_path, e))?;
        AnnotationSheet::from_csv_pair(sheet, key)
    }
}

/// Tallied outcome of a finished audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResemblanceResult {
    pub total: usize,
    /// Readings judged closer to the original prompt.
    pub utterance: usize,
    /// Readings judged closer to the re-transcription.
    pub augmented: usize,
    /// Readings judged equally close to both.
    pub both: usize,
    /// `(utterance + both) / total`.
    pub resemblance: f64,
}

/// Scores a filled sheet, de-randomizing each verdict through the hidden
/// key. Every row must carry a verdict; incomplete sheets are rejected
/// with the offending ids rather than scored optimistically.
pub fn compute_resemblance(sheet: &AnnotationSheet) -> Result<ResemblanceResult> {
    if sheet.is_empty() {
        return Err(Error::Config("cannot score an empty annotation sheet".into()));
    }
    let missing: Vec<String> = sheet
        .rows
        .iter()
        .filter(|r| r.verdict.is_none())
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingVerdicts { ids: missing });
    }

    let mut utterance = 0usize;
    let mut augmented = 0usize;
    let mut both = 0usize;
    for row in &sheet.rows {
        let verdict = row.verdict.expect("checked above");
        let chose_original = match (verdict, row.original_position) {
            (Verdict::Both, _) => {
                both += 1;
                continue;
            }
            (Verdict::Option1, 1) | (Verdict::Option2, 2) => true,
            (Verdict::Option1, 2) | (Verdict::Option2, 1) => false,
            (_, p) => {
                return Err(Error::SheetKeyMismatch(format!(
                    "row {:?} has position {p}, want 1 or 2",
                    row.id
                )))
            }
        };
        if chose_original {
            utterance += 1;
        } else {
            augmented += 1;
        }
    }

    let total = sheet.len();
    Ok(ResemblanceResult {
        total,
        utterance,
        augmented,
        both,
        resemblance: (utterance + both) as f64 / total as f64,
    })
}
