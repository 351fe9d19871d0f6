use crate::align::editop::{AnchoredOp, EditOpKind};
use crate::error::{Error, Result};

/// Applies edit operations to `hypothesis`, producing the repaired text.
///
/// For any pair of texts, `apply_editops(hyp, &extract_editops(ref, hyp))`
/// returns `ref` modulo whitespace (tokens are rejoined with single
/// spaces).
///
/// Each operation must anchor on the token actually at its `position`
/// (`join` also consumes the following token, which must itself be
/// untouched); violations are reported, not ignored.
pub fn apply_editops(hypothesis: &str, ops: &[AnchoredOp]) -> Result<String> {
    let tokens: Vec<&str> = hypothesis.split_whitespace().collect();

    let mut inserts_before: Vec<Vec<&str>> = vec![Vec::new(); tokens.len() + 1];
    let mut inserts_after: Vec<Vec<&str>> = vec![Vec::new(); tokens.len()];
    let mut rewrites: Vec<Option<&AnchoredOp>> = vec![None; tokens.len()];
    let mut joined: Vec<bool> = vec![false; tokens.len()];

    let bad = |op: &AnchoredOp, reason: String| Error::ApplyEditOp {
        op: op.to_string(),
        reason,
    };

    for anchored in ops {
        let pos = anchored.position;
        if tokens.is_empty() {
            // only insertions on the virtual empty anchor make sense here
            if pos != 0 || !anchored.op.anchor.is_empty() {
                return Err(bad(anchored, "the hypothesis is empty".into()));
            }
            match &anchored.op.kind {
                EditOpKind::InsertBefore { word } | EditOpKind::InsertAfter { word } => {
                    inserts_before[0].push(word);
                }
                _ => return Err(bad(anchored, "the hypothesis is empty".into())),
            }
            continue;
        }
        if pos >= tokens.len() {
            return Err(bad(
                anchored,
                format!("position {pos} is outside the {}-token hypothesis", tokens.len()),
            ));
        }
        if anchored.op.anchor != tokens[pos] {
            return Err(bad(
                anchored,
                format!("anchor does not match token {:?} at position {pos}", tokens[pos]),
            ));
        }
        match &anchored.op.kind {
            EditOpKind::InsertBefore { word } => inserts_before[pos].push(word),
            EditOpKind::InsertAfter { word } => inserts_after[pos].push(word),
            _ => {
                if rewrites[pos].is_some() {
                    return Err(bad(anchored, format!("token at position {pos} is rewritten twice")));
                }
                rewrites[pos] = Some(anchored);
            }
        }
    }

    // join consumes its right neighbour; that neighbour must carry no ops of its own
    for pos in 0..tokens.len() {
        let Some(anchored) = rewrites[pos] else { continue };
        if let EditOpKind::Join { .. } = anchored.op.kind {
            if pos + 1 >= tokens.len() {
                return Err(bad(anchored, "no following token to join with".into()));
            }
            if rewrites[pos + 1].is_some()
                || !inserts_before[pos + 1].is_empty()
                || !inserts_after[pos + 1].is_empty()
            {
                return Err(bad(anchored, "the following token has operations of its own".into()));
            }
            joined[pos + 1] = true;
        }
    }

    let mut out: Vec<String> = Vec::with_capacity(tokens.len() + 2);
    for pos in 0..tokens.len() {
        if joined[pos] {
            continue;
        }
        for word in &inserts_before[pos] {
            out.push((*word).to_string());
        }
        match rewrites[pos] {
            None => out.push(tokens[pos].to_string()),
            Some(anchored) => {
                apply_rewrite(&mut out, tokens[pos], tokens.get(pos + 1).copied(), anchored)?
            }
        }
        for word in &inserts_after[pos] {
            out.push((*word).to_string());
        }
    }
    for word in &inserts_before[tokens.len()] {
        out.push((*word).to_string());
    }

    Ok(out.join(" "))
}

fn apply_rewrite(
    out: &mut Vec<String>,
    token: &str,
    next_token: Option<&str>,
    anchored: &AnchoredOp,
) -> Result<()> {
    let chars: Vec<char> = token.chars().collect();
    let bad = |reason: String| Error::ApplyEditOp { op: anchored.to_string(), reason };

    match &anchored.op.kind {
        EditOpKind::Del => {}
        EditOpKind::Replace { replacement } => out.push(replacement.clone()),
        EditOpKind::AddPrefix { prefix } => out.push(format!("{prefix}{token}")),
        EditOpKind::AddSuffix { suffix } => out.push(format!("{token}{suffix}")),
        EditOpKind::DelPrefix { count } => {
            if *count >= chars.len() {
                return Err(bad(format!(
                    "cannot drop {count} characters from a {}-character token",
                    chars.len()
                )));
            }
            out.push(chars[*count..].iter().collect());
        }
        EditOpKind::DelSuffix { count } => {
            if *count >= chars.len() {
                return Err(bad(format!(
                    "cannot drop {count} characters from a {}-character token",
                    chars.len()
                )));
            }
            out.push(chars[..chars.len() - count].iter().collect());
        }
        EditOpKind::ReplaceSuffix { suffix } => {
            let k = suffix.chars().count();
            if k > chars.len() {
                return Err(bad(format!(
                    "suffix {suffix:?} is longer than the {}-character token",
                    chars.len()
                )));
            }
            let mut s: String = chars[..chars.len() - k].iter().collect();
            s.push_str(suffix);
            out.push(s);
        }
        EditOpKind::SubstringReplace { pattern, replacement } => {
            if !token.contains(pattern.as_str()) {
                return Err(bad(format!("token does not contain {pattern:?}")));
            }
            out.push(token.replacen(pattern.as_str(), replacement, 1));
        }
        EditOpKind::Join { separator } => {
            let next = next_token.expect("join validated to have a right neighbour");
            out.push(format!("{token}{separator}{next}"));
        }
        EditOpKind::SplitAfter { offset } => {
            if *offset == 0 || *offset >= chars.len() {
                return Err(bad(format!(
                    "offset {offset} does not split a {}-character token in two",
                    chars.len()
                )));
            }
            out.push(chars[..*offset].iter().collect());
            out.push(chars[*offset..].iter().collect());
        }
        EditOpKind::SplitOnFirst { separator } => {
            let at = chars
                .iter()
                .position(|c| c == separator)
                .ok_or_else(|| bad(format!("token does not contain separator {separator:?}")))?;
            if at == 0 || at == chars.len() - 1 {
                return Err(bad(format!("separator {separator:?} sits at the token edge")));
            }
            out.push(chars[..at].iter().collect());
            out.push(chars[at + 1..].iter().collect());
        }
        EditOpKind::SplitOnLast { separator } => {
            let at = chars
                .iter()
                .rposition(|c| c == separator)
                .ok_or_else(|| bad(format!("token does not contain separator {separator:?}")))?;
            if at == 0 || at == chars.len() - 1 {
                return Err(bad(format!("separator {separator:?} sits at the token edge")));
            }
            out.push(chars[..at].iter().collect());
            out.push(chars[at + 1..].iter().collect());
        }
        EditOpKind::InsertBefore { .. } | EditOpKind::InsertAfter { .. } => {
            unreachable!("insertions are routed to the insert tables")
        }
    }
    Ok(())
}
