use serde::{Deserialize, Serialize};

use crate::corpus::{outcome_equal, Corpus, NluOutcome, Task};
use crate::error::{Error, Result};

/// Micro-averaged F1 over slot pairs, before and after the speech loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroF1 {
    pub before: f64,
    pub after: f64,
    /// `after - before`; negative means the loop cost slot quality.
    pub delta: f64,
}

/// Conventional quality metrics, for the "how much worse did it get"
/// question the robustness metrics deliberately do not answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardMetrics {
    pub task: Task,
    pub samples: usize,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    /// `after - before`.
    pub accuracy_delta: f64,
    /// Present only for the slots task.
    pub micro_f1: Option<MicroF1>,
}

/// Exact-match accuracy before/after, plus micro-F1 for slot corpora.
///
/// Every sample must be fully evaluated and carry `task`-shaped outcomes.
/// Accuracy counts a slot prediction as correct only when the whole set
/// matches; micro-F1 pools true/false positives and false negatives over
/// all slot pairs in the corpus.
pub fn standard_metrics(corpus: &Corpus, task: Task) -> Result<StandardMetrics> {
    if corpus.is_empty() {
        return Err(Error::EmptyMetricDomain { metric: "accuracy".to_string() });
    }

    let mut correct_before = 0usize;
    let mut correct_after = 0usize;
    // pooled counts: (true positives, false positives, false negatives)
    let mut pool_before = (0usize, 0usize, 0usize);
    let mut pool_after = (0usize, 0usize, 0usize);

    for sample in corpus {
        if sample.expected.task() != task {
            return Err(Error::TaskMismatch {
                id: sample.id.clone(),
                expected: task,
                found: sample.expected.task(),
            });
        }
        let before = sample.before.as_ref().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "before",
        })?;
        let after = sample.after.as_ref().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "after",
        })?;
        if outcome_equal(before, &sample.expected)? {
            correct_before += 1;
        }
        if outcome_equal(after, &sample.expected)? {
            correct_after += 1;
        }
        if task == Task::Slots {
            accumulate_slot_pool(&mut pool_before, &sample.expected, before);
            accumulate_slot_pool(&mut pool_after, &sample.expected, after);
        }
    }

    let n = corpus.len() as f64;
    let accuracy_before = correct_before as f64 / n;
    let accuracy_after = correct_after as f64 / n;
    let micro_f1 = if task == Task::Slots {
        let before = micro_f1(pool_before)?;
        let after = micro_f1(pool_after)?;
        Some(MicroF1 { before, after, delta: after - before })
    } else {
        None
    };

    Ok(StandardMetrics {
        task,
        samples: corpus.len(),
        accuracy_before,
        accuracy_after,
        accuracy_delta: accuracy_after - accuracy_before,
        micro_f1,
    })
}

fn accumulate_slot_pool(pool: &mut (usize, usize, usize), expected: &NluOutcome, predicted: &NluOutcome) {
    let gold = expected.slot_set().expect("task checked as slots");
    let pred = predicted.slot_set().expect("outcome kinds checked by outcome_equal");
    pool.0 += pred.intersection(gold).count();
    pool.1 += pred.difference(gold).count();
    pool.2 += gold.difference(pred).count();
}

fn micro_f1((tp, fp, fn_): (usize, usize, usize)) -> Result<f64> {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        // no slot pairs anywhere, gold or predicted: F1 has no definition
        return Err(Error::EmptyMetricDomain { metric: "micro-F1".to_string() });
    }
    Ok(2.0 * tp as f64 / denom as f64)
}
