use serde::{Deserialize, Serialize};

/// Controls how raw text is canonicalized before any comparison.
///
/// Every comparison in this crate (change detection, outcome equality on
/// slot values, alignment) runs on normalized text, so the policy used to
/// build a corpus decides what counts as "the same utterance".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationPolicy {
    pub lowercase: bool,
    pub collapse_whitespace: bool,
    pub strip_outer_whitespace: bool,
    /// Drop ASCII punctuation hanging off the end of the text ("stop." -> "stop").
    /// Off by default: terminal punctuation can carry intent.
    pub strip_terminal_punctuation: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            lowercase: true,
            collapse_whitespace: true,
            strip_outer_whitespace: true,
            strip_terminal_punctuation: false,
        }
    }
}

impl NormalizationPolicy {
    /// Identity policy: text passes through untouched.
    pub fn none() -> Self {
        NormalizationPolicy {
            lowercase: false,
            collapse_whitespace: false,
            strip_outer_whitespace: false,
            strip_terminal_punctuation: false,
        }
    }
}

/// Applies `policy` to `text`. Idempotent for every flag combination:
/// `normalize_text(&normalize_text(t, p), p) == normalize_text(t, p)`.
pub fn normalize_text(text: &str, policy: &NormalizationPolicy) -> String {
    let mut out = if policy.lowercase {
        text.to_lowercase()
    } else {
        text.to_string()
    };

    if policy.collapse_whitespace {
        let mut collapsed = String::with_capacity(out.len());
        let mut in_space = false;
        for ch in out.chars() {
            if ch.is_whitespace() {
                if !in_space {
                    collapsed.push(' ');
                }
                in_space = true;
            } else {
                collapsed.push(ch);
                in_space = false;
            }
        }
        out = collapsed;
    }

    if policy.strip_outer_whitespace {
        let trimmed = out.trim();
        if trimmed.len() != out.len() {
            out = trimmed.to_string();
        }
    }

    if policy.strip_terminal_punctuation {
        // stripping "x !" down to "x " exposes whitespace which may hide
        // more punctuation ("! !"), so strip to a fixpoint
        loop {
            let len = out.len();
            out.truncate(out.trim_end_matches(|c: char| c.is_ascii_punctuation()).len());
            if policy.strip_outer_whitespace {
                out.truncate(out.trim_end().len());
            }
            if out.len() == len {
                break;
            }
        }
    }

    out
}
