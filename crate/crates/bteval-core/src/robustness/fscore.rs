use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, NluOutcome};
use crate::error::{Error, Result};

/// Which way a ratio of counts moves when deltas are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Unchanged,
    /// The deltas push numerator and denominator the same way; the outcome
    /// depends on the baseline, so no direction can be claimed.
    Indeterminate,
}

/// How the speech loop moved one label's F-score ingredients.
///
/// Counts are exact. Directions describe how precision (`TP/(TP+FP)`) and
/// recall (`TP/(TP+FN)`) move for a model with generic positive baseline
/// counts — sign analysis on the deltas, which stays meaningful even where
/// a tiny corpus leaves the ratio itself 0/0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDelta {
    pub label: String,
    pub tp_before: usize,
    pub fp_before: usize,
    pub fn_before: usize,
    pub tp_after: usize,
    pub fp_after: usize,
    pub fn_after: usize,
    pub tp_delta: i64,
    pub fp_delta: i64,
    pub fn_delta: i64,
    pub precision_direction: Direction,
    pub recall_direction: Direction,
}

/// Per-label true-positive/false-positive/false-negative movement between
/// the `before` and `after` predictions, for label-valued tasks.
///
/// Labels are the union of everything seen in gold and predictions, sorted.
/// Total TP+FN is invariant per label (`tp_delta == -fn_delta` summed over
/// gold occurrences stays fixed), which pins down the bookkeeping.
pub fn fscore_component_delta(corpus: &Corpus) -> Result<Vec<LabelDelta>> {
    let mut labels: BTreeSet<String> = BTreeSet::new();
    let mut rows: Vec<(String, String, String)> = Vec::with_capacity(corpus.len());

    for sample in corpus {
        let before = sample.before.as_ref().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "before",
        })?;
        let after = sample.after.as_ref().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "after",
        })?;
        let mut label_of = |o: &NluOutcome| -> Result<String> {
            let label = o.label().ok_or(Error::LabelTaskRequired { id: sample.id.clone() })?;
            labels.insert(label.to_string());
            Ok(label.to_string())
        };
        let expected = label_of(&sample.expected)?;
        let before = label_of(before)?;
        let after = label_of(after)?;
        rows.push((expected, before, after));
    }

    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        let mut before = (0usize, 0usize, 0usize);
        let mut after = (0usize, 0usize, 0usize);
        for (expected, b, a) in &rows {
            tally(&mut before, &label, expected, b);
            tally(&mut after, &label, expected, a);
        }
        let tp_delta = after.0 as i64 - before.0 as i64;
        let fp_delta = after.1 as i64 - before.1 as i64;
        let fn_delta = after.2 as i64 - before.2 as i64;
        out.push(LabelDelta {
            label,
            tp_before: before.0,
            fp_before: before.1,
            fn_before: before.2,
            tp_after: after.0,
            fp_after: after.1,
            fn_after: after.2,
            tp_delta,
            fp_delta,
            fn_delta,
            precision_direction: ratio_direction(tp_delta, fp_delta),
            recall_direction: ratio_direction(tp_delta, fn_delta),
        });
    }
    Ok(out)
}

fn tally(counts: &mut (usize, usize, usize), label: &str, expected: &str, predicted: &str) {
    let is_gold = expected == label;
    let is_pred = predicted == label;
    match (is_pred, is_gold) {
        (true, true) => counts.0 += 1,
        (true, false) => counts.1 += 1,
        (false, true) => counts.2 += 1,
        (false, false) => {}
    }
}

/// Direction of `TP/(TP+X)` under `(tp_delta, x_delta)`, for generic
/// positive baselines. Deltas pulling the ratio the same way compose;
/// opposing pulls are indeterminate.
fn ratio_direction(tp_delta: i64, x_delta: i64) -> Direction {
    let up = tp_delta > 0 || x_delta < 0;
    let down = tp_delta < 0 || x_delta > 0;
    match (up, down) {
        (false, false) => Direction::Unchanged,
        (true, false) => Direction::Up,
        (false, true) => Direction::Down,
        (true, true) => Direction::Indeterminate,
    }
}
