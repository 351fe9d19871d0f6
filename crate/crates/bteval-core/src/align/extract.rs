use crate::align::editop::{AnchoredOp, EditOp, EditOpKind};
use crate::align::matcher::similarity;
use crate::align::spans::{diff_spans, DiffKind, DiffSpan};

/// Derives the edit operations that turn `hypothesis` back into `reference`.
///
/// Tokenization is whitespace splitting. Differing regions found by
/// alignment are converted span by span: hypothesis-only tokens become
/// `del`, reference-only tokens become inserts anchored on a neighbouring
/// hypothesis token, and replaced regions are decomposed into per-token
/// rewrites, preferring the most specific operation (affix edits, substring
/// replacement, token splits and joins) and falling back to whole-token
/// `replace`. Equal texts produce no operations. This never fails: every
/// difference is expressible, at worst as `replace`.
///
/// Operations come back ordered by hypothesis position. Positions refer to
/// the *original* hypothesis tokens, which is what [`apply_editops`]
/// expects.
///
/// [`apply_editops`]: crate::align::apply_editops
pub fn extract_editops(reference: &str, hypothesis: &str) -> Vec<AnchoredOp> {
    let ref_tokens: Vec<&str> = reference.split_whitespace().collect();
    let hyp_tokens: Vec<&str> = hypothesis.split_whitespace().collect();
    if ref_tokens == hyp_tokens {
        return Vec::new();
    }

    let mut ops = Vec::new();
    for span in diff_spans(&ref_tokens, &hyp_tokens) {
        convert_span(&mut ops, &ref_tokens, &hyp_tokens, &span);
    }
    ops.sort_by_key(|op| op.position);
    ops
}

fn convert_span(ops: &mut Vec<AnchoredOp>, ref_tokens: &[&str], hyp_tokens: &[&str], span: &DiffSpan) {
    match span.kind {
        DiffKind::Inserted => {
            for pos in span.hyp_range.clone() {
                ops.push(AnchoredOp {
                    position: pos,
                    op: EditOp::new(hyp_tokens[pos], EditOpKind::Del),
                });
            }
        }
        DiffKind::Missing => {
            let words = &ref_tokens[span.ref_range.clone()];
            emit_insertions(ops, words, hyp_tokens, span.hyp_range.start);
        }
        DiffKind::Replaced => {
            pair_region(
                ops,
                &ref_tokens[span.ref_range.clone()],
                span.ref_range.start,
                &hyp_tokens[span.hyp_range.clone()],
                span.hyp_range.start,
                hyp_tokens,
            );
        }
    }
}

/// Reference-only words attach to the nearest hypothesis token: before the
/// token at `at`, or after the final token when the gap is at the end. An
/// empty hypothesis gets a virtual `""` anchor at position 0.
fn emit_insertions(ops: &mut Vec<AnchoredOp>, words: &[&str], hyp_tokens: &[&str], at: usize) {
    for &word in words {
        let (position, op) = if hyp_tokens.is_empty() {
            (0, EditOp::new("", EditOpKind::InsertBefore { word: word.into() }))
        } else if at < hyp_tokens.len() {
            (at, EditOp::new(hyp_tokens[at], EditOpKind::InsertBefore { word: word.into() }))
        } else {
            let last = hyp_tokens.len() - 1;
            (last, EditOp::new(hyp_tokens[last], EditOpKind::InsertAfter { word: word.into() }))
        };
        ops.push(AnchoredOp { position, op });
    }
}

/// Decomposes a replaced region into single-token rewrites.
///
/// Shapes with a direct operation (1:1 rewrite, 1:2 split, 2:1 join) are
/// tried first. Anything larger pairs the most similar hypothesis/reference
/// token pair (`2M/(|a|+|b|)` over characters; ties toward the leftmost
/// hypothesis, then reference, token), rewrites it, and recurses on what
/// lies left and right of the pair.
fn pair_region(
    ops: &mut Vec<AnchoredOp>,
    ref_side: &[&str],
    ref_base: usize,
    hyp_side: &[&str],
    hyp_base: usize,
    hyp_tokens: &[&str],
) {
    match (hyp_side.len(), ref_side.len()) {
        (0, 0) => {}
        (0, _) => emit_insertions(ops, ref_side, hyp_tokens, hyp_base),
        (_, 0) => {
            for (i, &tok) in hyp_side.iter().enumerate() {
                ops.push(AnchoredOp {
                    position: hyp_base + i,
                    op: EditOp::new(tok, EditOpKind::Del),
                });
            }
        }
        (1, 1) => {
            let kind = rewrite_token(hyp_side[0], ref_side[0]);
            ops.push(AnchoredOp { position: hyp_base, op: EditOp::new(hyp_side[0], kind) });
        }
        (1, 2) => {
            if let Some(kind) = try_split(hyp_side[0], ref_side[0], ref_side[1]) {
                ops.push(AnchoredOp { position: hyp_base, op: EditOp::new(hyp_side[0], kind) });
            } else {
                decompose(ops, ref_side, ref_base, hyp_side, hyp_base, hyp_tokens);
            }
        }
        (2, 1) => {
            if let Some(kind) = try_join(hyp_side[0], hyp_side[1], ref_side[0]) {
                ops.push(AnchoredOp { position: hyp_base, op: EditOp::new(hyp_side[0], kind) });
            } else {
                decompose(ops, ref_side, ref_base, hyp_side, hyp_base, hyp_tokens);
            }
        }
        _ => decompose(ops, ref_side, ref_base, hyp_side, hyp_base, hyp_tokens),
    }
}

fn decompose(
    ops: &mut Vec<AnchoredOp>,
    ref_side: &[&str],
    ref_base: usize,
    hyp_side: &[&str],
    hyp_base: usize,
    hyp_tokens: &[&str],
) {
    debug_assert!(!ref_side.is_empty() && !hyp_side.is_empty());
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for (i, hyp_tok) in hyp_side.iter().enumerate() {
        let hyp_chars: Vec<char> = hyp_tok.chars().collect();
        for (j, ref_tok) in ref_side.iter().enumerate() {
            let ref_chars: Vec<char> = ref_tok.chars().collect();
            let sim = similarity(&hyp_chars, &ref_chars);
            if sim > best.2 {
                best = (i, j, sim);
            }
        }
    }
    let (i, j, _) = best;

    pair_region(ops, &ref_side[..j], ref_base, &hyp_side[..i], hyp_base, hyp_tokens);
    let kind = rewrite_token(hyp_side[i], ref_side[j]);
    ops.push(AnchoredOp { position: hyp_base + i, op: EditOp::new(hyp_side[i], kind) });
    pair_region(
        ops,
        &ref_side[j + 1..],
        ref_base + j + 1,
        &hyp_side[i + 1..],
        hyp_base + i + 1,
        hyp_tokens,
    );
}

/// Picks the most specific single-token rewrite turning `hyp_tok` into
/// `ref_tok`, in fixed precedence order. `replace` always applies, so this
/// is total.
fn rewrite_token(hyp_tok: &str, ref_tok: &str) -> EditOpKind {
    let t: Vec<char> = hyp_tok.chars().collect();
    let u: Vec<char> = ref_tok.chars().collect();
    debug_assert_ne!(t, u, "equal tokens never reach the rewrite cascade");

    // pure extensions of the hypothesis token
    if u.len() > t.len() && u.ends_with(&t) {
        return EditOpKind::AddPrefix { prefix: u[..u.len() - t.len()].iter().collect() };
    }
    if u.len() > t.len() && u.starts_with(&t) {
        return EditOpKind::AddSuffix { suffix: u[t.len()..].iter().collect() };
    }
    // pure truncations
    if t.len() > u.len() && t.ends_with(&u) {
        return EditOpKind::DelPrefix { count: t.len() - u.len() };
    }
    if t.len() > u.len() && t.starts_with(&u) {
        return EditOpKind::DelSuffix { count: t.len() - u.len() };
    }

    let shared_prefix = t.iter().zip(u.iter()).take_while(|(a, b)| a == b).count();

    // tail rewrite: both tails have equal length k and k stays within the
    // back half of the token, so the rewrite reads as a suffix change
    let k = t.len() - shared_prefix;
    if shared_prefix > 0 && k <= t.len().div_ceil(2) && u.len() - shared_prefix == k {
        return EditOpKind::ReplaceSuffix { suffix: u[shared_prefix..].iter().collect() };
    }

    // interior rewrite: a shared prefix and shared suffix frame the change
    let t_rest = &t[shared_prefix..];
    let u_rest = &u[shared_prefix..];
    let shared_suffix = t_rest
        .iter()
        .rev()
        .zip(u_rest.iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    if shared_prefix > 0 && shared_suffix > 0 {
        let mut pattern: String = t[shared_prefix..t.len() - shared_suffix].iter().collect();
        let mut replacement: String = u[shared_prefix..u.len() - shared_suffix].iter().collect();
        if pattern.is_empty() {
            // pure insertion: widen by one shared-suffix character so the
            // pattern stays matchable ("my" -> "may" reads sreplace_y_ay)
            pattern = t[shared_prefix..=t.len() - shared_suffix].iter().collect();
            replacement = u[shared_prefix..=u.len() - shared_suffix].iter().collect();
        }
        // the rewrite is only faithful if the pattern's first occurrence is
        // the framed one; otherwise fall through to replace
        if hyp_tok.replacen(pattern.as_str(), replacement.as_str(), 1) == ref_tok {
            return EditOpKind::SubstringReplace { pattern, replacement };
        }
    }

    EditOpKind::Replace { replacement: ref_tok.to_string() }
}

/// One hypothesis token covering two reference tokens: a split, when the
/// characters line up exactly.
fn try_split(hyp_tok: &str, first: &str, second: &str) -> Option<EditOpKind> {
    let t: Vec<char> = hyp_tok.chars().collect();
    let a: Vec<char> = first.chars().collect();
    let b: Vec<char> = second.chars().collect();

    if t.len() == a.len() + b.len() && t.starts_with(&a) && t.ends_with(&b) {
        return Some(EditOpKind::SplitAfter { offset: a.len() });
    }
    if t.len() == a.len() + b.len() + 1 && t.starts_with(&a) && t.ends_with(&b) {
        let sep = t[a.len()];
        let cut = a.len();
        let first_at = t.iter().position(|&c| c == sep).expect("separator exists");
        let last_at = t.len() - 1 - t.iter().rev().position(|&c| c == sep).expect("separator exists");
        // prefer the description a reader would use: punctuation splits read
        // naturally as "split on the first -", letters as "split on the last e"
        let first_kind = EditOpKind::SplitOnFirst { separator: sep };
        let last_kind = EditOpKind::SplitOnLast { separator: sep };
        let ordered = if sep.is_alphanumeric() {
            [(last_at, last_kind), (first_at, first_kind)]
        } else {
            [(first_at, first_kind), (last_at, last_kind)]
        };
        for (at, kind) in ordered {
            if at == cut {
                return Some(kind);
            }
        }
    }
    None
}

/// Two hypothesis tokens covering one reference token: a join, when the
/// characters line up exactly (optionally around a single joining character).
fn try_join(first: &str, second: &str, ref_tok: &str) -> Option<EditOpKind> {
    let a: Vec<char> = first.chars().collect();
    let b: Vec<char> = second.chars().collect();
    let u: Vec<char> = ref_tok.chars().collect();

    if u.len() == a.len() + b.len() && u.starts_with(&a) && u.ends_with(&b) {
        return Some(EditOpKind::Join { separator: String::new() });
    }
    if u.len() == a.len() + b.len() + 1 && u.starts_with(&a) && u.ends_with(&b) {
        return Some(EditOpKind::Join { separator: u[a.len()].to_string() });
    }
    None
}
