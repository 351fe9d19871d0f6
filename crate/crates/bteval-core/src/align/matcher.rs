use std::collections::HashMap;
use std::hash::Hash;

/// A maximal run of equal elements: `a[a_start..a_start+len] == b[b_start..b_start+len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchBlock {
    pub a_start: usize,
    pub b_start: usize,
    pub len: usize,
}

/// Greedy longest-common-substring alignment (Ratcliff/Obershelp).
///
/// Finds the longest matching block, then recurses on the pieces to its
/// left and right. Ties on length break toward the earliest start in `a`,
/// then the earliest start in `b`, so output is fully deterministic.
/// Returned blocks are non-overlapping, sorted by `a_start` (equivalently
/// `b_start`), and never adjacent: touching runs are merged into one block.
pub fn ro_align<T: Eq + Hash>(a: &[T], b: &[T]) -> Vec<MatchBlock> {
    let mut b_index: HashMap<&T, Vec<usize>> = HashMap::new();
    for (j, item) in b.iter().enumerate() {
        b_index.entry(item).or_default().push(j);
    }

    let mut blocks = Vec::new();
    let mut queue = vec![(0usize, a.len(), 0usize, b.len())];
    while let Some((a_lo, a_hi, b_lo, b_hi)) = queue.pop() {
        let m = find_longest_match(a, &b_index, a_lo, a_hi, b_lo, b_hi);
        if m.len == 0 {
            continue;
        }
        queue.push((a_lo, m.a_start, b_lo, m.b_start));
        queue.push((m.a_start + m.len, a_hi, m.b_start + m.len, b_hi));
        blocks.push(m);
    }
    blocks.sort_by_key(|m| m.a_start);

    // merge blocks that touch on both sides so spans between blocks are never empty
    let mut merged: Vec<MatchBlock> = Vec::with_capacity(blocks.len());
    for m in blocks {
        match merged.last_mut() {
            Some(last)
                if last.a_start + last.len == m.a_start && last.b_start + last.len == m.b_start =>
            {
                last.len += m.len;
            }
            _ => merged.push(m),
        }
    }
    merged
}

/// Similarity ratio `2*M / (|a| + |b|)` where `M` is the total matched
/// length. Two empty sequences are fully similar (`1.0`).
pub fn similarity<T: Eq + Hash>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let matched: usize = ro_align(a, b).iter().map(|m| m.len).sum();
    2.0 * matched as f64 / (a.len() + b.len()) as f64
}

/// Longest block with `a_start` in `[a_lo, a_hi)` and `b_start` in `[b_lo, b_hi)`.
///
/// Walks `a` once; `lengths[j]` holds the length of the longest match
/// ending at `a[i]`/`b[j]`. Strict `>` when updating the best keeps the
/// first (leftmost) block among equals.
fn find_longest_match<T: Eq + Hash>(
    a: &[T],
    b_index: &HashMap<&T, Vec<usize>>,
    a_lo: usize,
    a_hi: usize,
    b_lo: usize,
    b_hi: usize,
) -> MatchBlock {
    let mut best = MatchBlock { a_start: a_lo, b_start: b_lo, len: 0 };
    let mut lengths: HashMap<usize, usize> = HashMap::new();
    for (i, token) in a.iter().enumerate().take(a_hi).skip(a_lo) {
        let mut next: HashMap<usize, usize> = HashMap::new();
        if let Some(positions) = b_index.get(token) {
            for &j in positions {
                if j < b_lo {
                    continue;
                }
                if j >= b_hi {
                    break;
                }
                let k = if j > b_lo { lengths.get(&(j - 1)).copied().unwrap_or(0) + 1 } else { 1 };
                next.insert(j, k);
                if k > best.len {
                    best = MatchBlock { a_start: i + 1 - k, b_start: j + 1 - k, len: k };
                }
            }
        }
        lengths = next;
    }
    best
}
