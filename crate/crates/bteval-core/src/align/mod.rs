//! Token alignment and edit-operation extraction.
//!
//! Given a reference utterance and the hypothesis that came back from the
//! speech loop, this module answers *what exactly changed*: it aligns the
//! two token sequences (greedy longest-common-substring matching), carves
//! out the differing regions, and names each difference with a small
//! vocabulary of anchored edit operations (`uh[del]`,
//! `male[replace_suffix_il]`, `run[join_-]`, ...). Operations are exact:
//! applying a sample's operations to its hypothesis reconstructs the
//! reference.

mod apply;
mod editop;
mod extract;
mod matcher;
mod spans;

pub use apply::apply_editops;
pub use editop::{format_editop, parse_editop, AnchoredOp, EditOp, EditOpKind};
pub use extract::extract_editops;
pub use matcher::{ro_align, similarity, MatchBlock};
pub use spans::{diff_spans, DiffKind, DiffSpan};
