use std::fmt;

use crate::error::{Error, Result};

/// The transformation half of an edit operation, without its anchor.
///
/// Operations describe how to turn a *hypothesis* token back into reference
/// tokens, so applying a sample's operations to its hypothesis restores the
/// reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditOpKind {
    /// Remove the anchor token.
    Del,
    /// Swap the anchor for `replacement`.
    Replace { replacement: String },
    /// Put `word` immediately before the anchor.
    InsertBefore { word: String },
    /// Put `word` immediately after the anchor.
    InsertAfter { word: String },
    /// Glue `prefix` onto the front of the anchor.
    AddPrefix { prefix: String },
    /// Glue `suffix` onto the end of the anchor.
    AddSuffix { suffix: String },
    /// Drop the last `count` characters.
    DelSuffix { count: usize },
    /// Drop the first `count` characters.
    DelPrefix { count: usize },
    /// Overwrite the last `suffix.chars().count()` characters with `suffix`.
    ReplaceSuffix { suffix: String },
    /// Replace the first occurrence of `pattern` inside the anchor with
    /// `replacement` (which may be empty).
    SubstringReplace { pattern: String, replacement: String },
    /// Merge the anchor with the following token, writing `separator`
    /// (possibly empty) between them.
    Join { separator: String },
    /// Cut the anchor in two after `offset` characters.
    SplitAfter { offset: usize },
    /// Cut at the first occurrence of `separator`, dropping the separator.
    SplitOnFirst { separator: char },
    /// Cut at the last occurrence of `separator`, dropping the separator.
    SplitOnLast { separator: char },
}

impl EditOpKind {
    pub fn name(&self) -> &'static str {
        match self {
            EditOpKind::Del => "del",
            EditOpKind::Replace { .. } => "replace",
            EditOpKind::InsertBefore { .. } => "insert_before",
            EditOpKind::InsertAfter { .. } => "insert_after",
            EditOpKind::AddPrefix { .. } => "add_prefix",
            EditOpKind::AddSuffix { .. } => "add_suffix",
            EditOpKind::DelSuffix { .. } => "del_suffix",
            EditOpKind::DelPrefix { .. } => "del_prefix",
            EditOpKind::ReplaceSuffix { .. } => "replace_suffix",
            EditOpKind::SubstringReplace { .. } => "sreplace",
            EditOpKind::Join { .. } => "join",
            EditOpKind::SplitAfter { .. } => "split_after",
            EditOpKind::SplitOnFirst { .. } => "split_on_first",
            EditOpKind::SplitOnLast { .. } => "split_on_last",
        }
    }
}

/// An edit operation bound to the token text it rewrites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EditOp {
    /// The hypothesis token this operation rewrites; `""` when the
    /// hypothesis is empty and words can only be inserted into nothing.
    pub anchor: String,
    pub kind: EditOpKind,
}

impl EditOp {
    pub fn new(anchor: impl Into<String>, kind: EditOpKind) -> Self {
        EditOp { anchor: anchor.into(), kind }
    }
}

/// An [`EditOp`] located at a token position in a specific hypothesis.
///
/// `position` disambiguates repeated tokens when applying; the serialized
/// form (`anchor[op]`) deliberately omits it so that identical errors on
/// different utterances collapse into one feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnchoredOp {
    pub position: usize,
    pub op: EditOp,
}

/// Serializes as `anchor[name_arg1_arg2]`; an empty anchor renders as `""`.
pub fn format_editop(op: &EditOp) -> String {
    let anchor = if op.anchor.is_empty() { "\"\"" } else { op.anchor.as_str() };
    let body = match &op.kind {
        EditOpKind::Del => "del".to_string(),
        EditOpKind::Replace { replacement } => format!("replace_{replacement}"),
        EditOpKind::InsertBefore { word } => format!("insert_before_{word}"),
        EditOpKind::InsertAfter { word } => format!("insert_after_{word}"),
        EditOpKind::AddPrefix { prefix } => format!("add_prefix_{prefix}"),
        EditOpKind::AddSuffix { suffix } => format!("add_suffix_{suffix}"),
        EditOpKind::DelSuffix { count } => format!("del_suffix_{count}"),
        EditOpKind::DelPrefix { count } => format!("del_prefix_{count}"),
        EditOpKind::ReplaceSuffix { suffix } => format!("replace_suffix_{suffix}"),
        EditOpKind::SubstringReplace { pattern, replacement } => {
            format!("sreplace_{pattern}_{replacement}")
        }
        EditOpKind::Join { separator } => format!("join_{separator}"),
        EditOpKind::SplitAfter { offset } => format!("split_after_{offset}"),
        EditOpKind::SplitOnFirst { separator } => format!("split_on_first_{separator}"),
        EditOpKind::SplitOnLast { separator } => format!("split_on_last_{separator}"),
    };
    format!("{anchor}[{body}]")
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_editop(self))
    }
}

impl fmt::Display for AnchoredOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_editop(&self.op))
    }
}

/// Operation names tried longest-first when parsing, so that `del` never
/// swallows `del_suffix_2`. Accepts the aliases `add_before`/`add_after`
/// (for the insert pair) and the historical spelling `split_aftert`.
const PARSE_NAMES: &[&str] = &[
    "split_on_first",
    "split_on_last",
    "replace_suffix",
    "insert_before",
    "insert_after",
    "split_aftert",
    "split_after",
    "add_before",
    "add_prefix",
    "add_suffix",
    "del_suffix",
    "del_prefix",
    "add_after",
    "sreplace",
    "replace",
    "join",
    "del",
];

/// Parses the `anchor[op_args]` form produced by [`format_editop`].
///
/// Anchors may themselves contain `[`, so every candidate bracket is tried
/// left to right until one parses as a known operation.
pub fn parse_editop(input: &str) -> Result<EditOp> {
    let fail = |reason: &str| Error::ParseEditOp {
        input: input.to_string(),
        reason: reason.to_string(),
    };

    let stripped = input.strip_suffix(']').ok_or_else(|| fail("missing trailing `]`"))?;
    let mut last_reason: Option<String> = None;
    for (pos, _) in stripped.match_indices('[') {
        let anchor = &stripped[..pos];
        let body = &stripped[pos + 1..];
        match parse_body(body) {
            Ok(kind) => {
                let anchor = if anchor == "\"\"" { "" } else { anchor };
                return Ok(EditOp::new(anchor, kind));
            }
            Err(reason) => last_reason = Some(reason),
        }
    }
    Err(fail(&last_reason.unwrap_or_else(|| "no `[` found".to_string())))
}

fn parse_body(body: &str) -> std::result::Result<EditOpKind, String> {
    let (name, args) = PARSE_NAMES
        .iter()
        .find_map(|name| {
            let rest = body.strip_prefix(name)?;
            if rest.is_empty() {
                Some((*name, None))
            } else {
                rest.strip_prefix('_').map(|args| (*name, Some(args)))
            }
        })
        .ok_or_else(|| format!("unknown operation in {body:?}"))?;

    let require = || args.ok_or_else(|| format!("`{name}` needs an argument"));
    let nonempty = |arg: &str| -> std::result::Result<String, String> {
        if arg.is_empty() {
            Err(format!("`{name}` argument must not be empty"))
        } else {
            Ok(arg.to_string())
        }
    };
    let number = |arg: &str| -> std::result::Result<usize, String> {
        let n: usize = arg
            .parse()
            .map_err(|_| format!("`{name}` needs a number, got {arg:?}"))?;
        if n == 0 {
            return Err(format!("`{name}` count must be positive"));
        }
        Ok(n)
    };
    let single_char = |arg: &str| -> std::result::Result<char, String> {
        let mut chars = arg.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(format!("`{name}` needs exactly one separator character, got {arg:?}")),
        }
    };

    match name {
        "del" => match args {
            None => Ok(EditOpKind::Del),
            Some(_) => Err("`del` takes no argument".to_string()),
        },
        "replace" => Ok(EditOpKind::Replace { replacement: nonempty(require()?)? }),
        "insert_before" | "add_before" => {
            Ok(EditOpKind::InsertBefore { word: nonempty(require()?)? })
        }
        "insert_after" | "add_after" => {
            Ok(EditOpKind::InsertAfter { word: nonempty(require()?)? })
        }
        "add_prefix" => Ok(EditOpKind::AddPrefix { prefix: nonempty(require()?)? }),
        "add_suffix" => Ok(EditOpKind::AddSuffix { suffix: nonempty(require()?)? }),
        "del_suffix" => Ok(EditOpKind::DelSuffix { count: number(require()?)? }),
        "del_prefix" => Ok(EditOpKind::DelPrefix { count: number(require()?)? }),
        "replace_suffix" => Ok(EditOpKind::ReplaceSuffix { suffix: nonempty(require()?)? }),
        "sreplace" => {
            let args = require()?;
            let (pattern, replacement) = args
                .split_once('_')
                .ok_or_else(|| "`sreplace` needs pattern and replacement".to_string())?;
            if pattern.is_empty() {
                return Err("`sreplace` pattern must not be empty".to_string());
            }
            Ok(EditOpKind::SubstringReplace {
                pattern: pattern.to_string(),
                replacement: replacement.to_string(),
            })
        }
        // a bare `join` (no trailing underscore) is rejected: the canonical
        // spelling of a separator-less join is `join_`
        "join" => Ok(EditOpKind::Join { separator: require()?.to_string() }),
        "split_after" | "split_aftert" => {
            Ok(EditOpKind::SplitAfter { offset: number(require()?)? })
        }
        "split_on_first" => Ok(EditOpKind::SplitOnFirst { separator: single_char(require()?)? }),
        "split_on_last" => Ok(EditOpKind::SplitOnLast { separator: single_char(require()?)? }),
        _ => unreachable!("PARSE_NAMES covers every branch"),
    }
}
