use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::corpus::{Corpus, NluOutcome, NormalizationPolicy, Sample, SlotPair, Task};
use crate::error::{Error, Result};

/// Imports a MASSIVE-style JSONL dump into a corpus for `task`.
///
/// Each record needs `id`, `utt`, `annot_utt`, `scenario`, `intent` and
/// `partition`. Gold outcomes come from `scenario` (domain task), `intent`
/// (intent task) or the bracket markup in `annot_utt` (slots task, shaped
/// `[name : value]`). `partition`, when given, keeps only matching records
/// ("test", "train", ...).
pub fn import_massive(
    path: impl AsRef<Path>,
    task: Task,
    partition: Option<&str>,
    policy: &NormalizationPolicy,
) -> Result<Corpus> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_massive_str(&raw, task, partition, policy)
}

/// Same as [`import_massive`], reading from a string.
pub fn import_massive_str(
    text: &str,
    task: Task,
    partition: Option<&str>,
    policy: &NormalizationPolicy,
) -> Result<Corpus> {
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: Value = serde_json::from_str(line)
            .map_err(|e| Error::MalformedRecord { line: line_no, source: e })?;

        if let Some(p) = partition {
            if str_field(&record, "partition", line_no)? != p {
                continue;
            }
        } else {
            // still required, so a typo'd file fails loudly instead of merging splits
            str_field(&record, "partition", line_no)?;
        }

        let id = id_field(&record, line_no)?;
        let utt = str_field(&record, "utt", line_no)?.to_string();
        let expected = match task {
            Task::Domain => NluOutcome::domain(str_field(&record, "scenario", line_no)?),
            Task::Intent => NluOutcome::intent(str_field(&record, "intent", line_no)?),
            Task::Slots => {
                let annot = str_field(&record, "annot_utt", line_no)?;
                let slots = parse_slot_annotation(annot)
                    .map_err(|reason| Error::SlotAnnotation { line: line_no, reason })?;
                NluOutcome::Slots { slots }
            }
        };
        samples.push(Sample::new(id, utt, expected));
    }
    Corpus::from_samples(samples, policy)
}

fn id_field(record: &Value, line: usize) -> Result<String> {
    match record.get("id") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) | None => Err(Error::MissingField { line, field: "id" }),
    }
}

fn str_field<'a>(record: &'a Value, field: &'static str, line: usize) -> Result<&'a str> {
    record
        .get(field)
        .and_then(Value::as_str)
        .ok_or(Error::MissingField { line, field })
}

/// Extracts `[name : value]` spans from an annotated utterance.
///
/// Brackets cannot nest. The first `:` inside a span separates name from
/// value, so values may themselves contain colons (`[time : 10:30]`).
pub fn parse_slot_annotation(annot: &str) -> std::result::Result<BTreeSet<SlotPair>, String> {
    let mut slots = BTreeSet::new();
    let mut span: Option<String> = None;
    for ch in annot.chars() {
        match (&mut span, ch) {
            (None, '[') => span = Some(String::new()),
            (None, ']') => return Err(format!("unbalanced `]` in {annot:?}")),
            (None, _) => {}
            (Some(_), '[') => return Err(format!("nested `[` in {annot:?}")),
            (Some(inside), ']') => {
                let (name, value) = inside
                    .split_once(':')
                    .ok_or_else(|| format!("span {inside:?} has no `:` separator"))?;
                let name = name.trim();
                let value = value.trim();
                if name.is_empty() {
                    return Err(format!("span {inside:?} has an empty slot name"));
                }
                if value.is_empty() {
                    return Err(format!("span {inside:?} has an empty slot value"));
                }
                slots.insert(SlotPair::new(name, value));
                span = None;
            }
            (Some(inside), c) => inside.push(c),
        }
    }
    if span.is_some() {
        return Err(format!("unbalanced `[` in {annot:?}"));
    }
    Ok(slots)
}
