use std::hash::Hash;
use std::ops::Range;

use crate::align::matcher::ro_align;

/// What a differing region holds on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    /// Tokens present only in the reference (the hypothesis lost them).
    Missing,
    /// Tokens present only in the hypothesis (the hypothesis gained them).
    Inserted,
    /// Both sides have tokens and they differ.
    Replaced,
}

/// A maximal differing region between two token sequences.
///
/// Ranges index the original sequences; one side may be empty (never both).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSpan {
    pub ref_range: Range<usize>,
    pub hyp_range: Range<usize>,
    pub kind: DiffKind,
}

/// The regions where `hyp_tokens` disagrees with `ref_tokens`, in order.
///
/// Gaps between matched blocks become spans; equal sequences produce none.
/// Within a `Replaced` span the two sides share no common token — any
/// shared token would have been matched and split the span.
pub fn diff_spans<T: Eq + Hash>(ref_tokens: &[T], hyp_tokens: &[T]) -> Vec<DiffSpan> {
    // hypothesis is the "a" side so tie-breaks favor early hypothesis positions
    let blocks = ro_align(hyp_tokens, ref_tokens);
    let mut spans = Vec::new();
    let mut hyp_pos = 0usize;
    let mut ref_pos = 0usize;
    for (hyp_next, ref_next) in blocks
        .iter()
        .map(|m| (m.a_start, m.b_start))
        .chain(std::iter::once((hyp_tokens.len(), ref_tokens.len())))
    {
        let hyp_range = hyp_pos..hyp_next;
        let ref_range = ref_pos..ref_next;
        let kind = match (ref_range.is_empty(), hyp_range.is_empty()) {
            (true, true) => None,
            (false, true) => Some(DiffKind::Missing),
            (true, false) => Some(DiffKind::Inserted),
            (false, false) => Some(DiffKind::Replaced),
        };
        if let Some(kind) = kind {
            spans.push(DiffSpan { ref_range, hyp_range, kind });
        }
        if let Some(block) = blocks.iter().find(|m| m.a_start == hyp_next) {
            hyp_pos = hyp_next + block.len;
            ref_pos = ref_next + block.len;
        }
    }
    spans
}
