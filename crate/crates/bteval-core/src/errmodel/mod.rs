//! Ranking recognition errors by how much damage they cause.
//!
//! Every changed sample is described by the bag of edit operations that
//! would repair its hypothesis, labelled 1 when the prediction change
//! counts as damage under a [`RobustnessPolicy`]. A logistic regression
//! over those bags then weighs each operation: large positive weights mark
//! error patterns that *break* the NLU model, which is a very different
//! list from the merely frequent ones.

mod logreg;

pub use logreg::{
    logistic_gradient, logistic_objective, train_logreg, ErrorModel, Hyperparams, TrainingInfo,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::align::extract_editops;
use crate::corpus::{Corpus, Sample};
use crate::error::{Error, Result};
use crate::robustness::{categorize, RobustnessPolicy};

/// One training example: edit-operation counts plus the damage label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: String,
    /// Serialized edit operation -> occurrence count within this sample.
    pub features: BTreeMap<String, u32>,
    /// True when the prediction change counts as damage under the policy.
    pub label: bool,
}

/// Featurizes one evaluated sample.
///
/// Only samples whose text changed carry information about recognition
/// errors, so unchanged samples are rejected ([`Error::UnchangedText`])
/// rather than silently encoded as all-zero rows.
pub fn featurize(sample: &Sample, policy: &RobustnessPolicy) -> Result<FeatureVector> {
    let hypothesis = sample.hypothesis.as_ref().ok_or(Error::MissingOutcome {
        id: sample.id.clone(),
        field: "hypothesis",
    })?;
    if *hypothesis == sample.reference {
        return Err(Error::UnchangedText { id: sample.id.clone() });
    }
    let category = categorize(sample)?;
    let mut features: BTreeMap<String, u32> = BTreeMap::new();
    for op in extract_editops(&sample.reference, hypothesis) {
        *features.entry(op.to_string()).or_insert(0) += 1;
    }
    Ok(FeatureVector {
        id: sample.id.clone(),
        features,
        label: policy.is_negative(category),
    })
}

/// Featurizes every changed sample in the corpus, in corpus order.
/// Unchanged samples are skipped; missing outcomes are still errors.
pub fn featurize_corpus(corpus: &Corpus, policy: &RobustnessPolicy) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::new();
    for sample in corpus {
        match featurize(sample, policy) {
            Ok(fv) => out.push(fv),
            Err(Error::UnchangedText { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// The plain-frequency baseline: edit operations by total occurrence count
/// over all changed samples, most frequent first, ties broken by name.
/// `top` limits the list (0 means everything).
pub fn rank_frequency(corpus: &Corpus, top: usize) -> Result<Vec<(String, u64)>> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for sample in corpus {
        let hypothesis = sample.hypothesis.as_ref().ok_or(Error::MissingOutcome {
            id: sample.id.clone(),
            field: "hypothesis",
        })?;
        if *hypothesis == sample.reference {
            continue;
        }
        for op in extract_editops(&sample.reference, hypothesis) {
            *counts.entry(op.to_string()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if top > 0 {
        ranked.truncate(top);
    }
    Ok(ranked)
}

/// Trains a damage model on the corpus and returns operations by learned
/// weight, most damaging first. See [`train_logreg`] for the solver.
pub fn rank_errors(
    corpus: &Corpus,
    policy: &RobustnessPolicy,
    hyperparams: &Hyperparams,
    top: usize,
) -> Result<Vec<(String, f64)>> {
    let data = featurize_corpus(corpus, policy)?;
    let model = train_logreg(&data, hyperparams)?;
    Ok(model.rank(top))
}
