use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Corpus-level word error rate: total edits over total reference tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerResult {
    pub edits: usize,
    pub reference_tokens: usize,
    pub value: f64,
}

/// Word error rate over paired utterance lists.
///
/// Edits are token-level Levenshtein distance (insertions, deletions and
/// substitutions all cost 1), summed across pairs before dividing, so long
/// utterances weigh more than short ones. The lists must pair up, and the
/// references must contain at least one token overall — 0/0 is undefined,
/// not zero.
pub fn word_error_rate<S: AsRef<str>>(references: &[S], hypotheses: &[S]) -> Result<WerResult> {
    if references.len() != hypotheses.len() {
        return Err(Error::LengthMismatch {
            references: references.len(),
            hypotheses: hypotheses.len(),
        });
    }
    let mut edits = 0usize;
    let mut reference_tokens = 0usize;
    for (r, h) in references.iter().zip(hypotheses) {
        let r: Vec<&str> = r.as_ref().split_whitespace().collect();
        let h: Vec<&str> = h.as_ref().split_whitespace().collect();
        reference_tokens += r.len();
        edits += token_edit_distance(&r, &h);
    }
    if reference_tokens == 0 {
        return Err(Error::EmptyReference);
    }
    Ok(WerResult {
        edits,
        reference_tokens,
        value: edits as f64 / reference_tokens as f64,
    })
}

/// Levenshtein distance over token slices, two-row dynamic programming.
pub fn token_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr: Vec<usize> = vec![0; b.len() + 1];
    for (i, a_tok) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, b_tok) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(a_tok != b_tok);
            curr[j + 1] = substitution.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}
