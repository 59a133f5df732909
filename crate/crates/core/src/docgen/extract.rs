use std::collections::{BTreeMap, HashSet};

use crate::database::PredicateIndicator;
use crate::diag::{codes, Diagnostic};
use crate::lexer::{Token, TokenKind};
use crate::reader::{Sentence, SentenceKind};
use crate::span::SourceSpan;

/// Tags every PrologDoc block may use. Other `Tag:` lines are kept as
/// written.
pub const DEFAULT_TAGS: [&str; 3] = ["Author:", "Arguments:", "Description:"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DocTarget {
    Predicate(PredicateIndicator),
    Module(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DocBlock {
    /// `(tag, body)` in source order; tags keep their colon.
    pub entries: Vec<(String, String)>,
    pub raw_span: SourceSpan,
    pub target: DocTarget,
}

impl DocBlock {
    pub fn get(&self, tag: &str) -> Option<&str> {
        self.entries.iter().find(|(t, _)| t == tag).map(|(_, b)| b.as_str())
    }

    /// One `Tag: body` paragraph per entry.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(t, b)| if b.is_empty() { t.clone() } else { format!("{t} {b}") })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// A comment field: a run of line comments on consecutive lines, or one
/// block comment.
fn fields(comments: &[Token]) -> Vec<Vec<&Token>> {
    let mut out: Vec<Vec<&Token>> = Vec::new();
    for c in comments {
        let extends = match out.last().and_then(|f| f.last()) {
            Some(prev) => {
                prev.kind == TokenKind::LineComment
                    && c.kind == TokenKind::LineComment
                    && c.span.start_line == prev.span.start_line + 1
            }
            None => false,
        };
        if extends {
            out.last_mut().expect("field").push(c);
        } else {
            out.push(vec![c]);
        }
    }
    out
}

fn comment_lines(field: &[&Token]) -> Vec<String> {
    let mut lines = Vec::new();
    for tok in field {
        if tok.kind == TokenKind::LineComment {
            let body = tok.text.trim_start_matches('%');
            lines.push(body.strip_prefix(' ').unwrap_or(body).trim_end().to_string());
        } else {
            let body = tok.text.trim_start_matches("/*").trim_end_matches("*/");
            for l in body.lines() {
                let l = l.trim();
                let l = l.strip_prefix('*').map(|r| r.strip_prefix(' ').unwrap_or(r)).unwrap_or(l);
                lines.push(l.trim_end().to_string());
            }
        }
    }
    lines
}

/// `Tag:` at the start of a line: a capitalized word followed by a colon.
fn tag_of(line: &str) -> Option<(&str, &str)> {
    let line = line.trim_start();
    let colon = line.find(':')?;
    let word = &line[..colon];
    let ok = word.chars().next().is_some_and(|c| c.is_ascii_uppercase())
        && word.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-');
    ok.then(|| (&line[..=colon], line[colon + 1..].trim()))
}

/// Tagged entries of a comment field; empty when no default tag occurs.
pub fn parse_entries(lines: &[String]) -> Vec<(String, String)> {
    let mut entries: Vec<(String, Vec<&str>)> = Vec::new();
    for line in lines {
        match tag_of(line) {
            Some((tag, rest)) => entries.push((tag.to_string(), vec![rest])),
            None => {
                if let Some((_, body)) = entries.last_mut() {
                    body.push(line.trim());
                }
            }
        }
    }
    if !entries.iter().any(|(t, _)| DEFAULT_TAGS.contains(&t.as_str())) {
        return Vec::new();
    }
    entries
        .into_iter()
        .map(|(t, body)| {
            let text = body.into_iter().filter(|l| !l.is_empty()).collect::<Vec<_>>().join("\n");
            (t, text)
        })
        .collect()
}

/// Attach PrologDoc blocks to the predicates and modules defined right
/// below them.
pub fn extract_docs(sentences: &[Sentence]) -> (Vec<DocBlock>, Vec<Diagnostic>) {
    let mut docs: Vec<DocBlock> = Vec::new();
    let mut diags = Vec::new();
    let mut seen_defs: HashSet<(String, usize)> = HashSet::new();
    let mut targets: BTreeMap<DocTarget, SourceSpan> = BTreeMap::new();
    let mut prev_end_line = 0;
    for s in sentences {
        let target = match s.kind {
            SentenceKind::Directive => s
                .goal()
                .and_then(|g| g.match_functor("module", 2))
                .and_then(|a| a[0].as_atom())
                .map(|m| DocTarget::Module(m.to_string())),
            _ => s.defines().map(|(n, a)| DocTarget::Predicate(PredicateIndicator::new(n, a))),
        };
        let first_def = match &target {
            Some(DocTarget::Predicate(pi)) => seen_defs.insert(pi.key()),
            _ => true,
        };
        // A comment on the line where the previous sentence ends trails it.
        let own: Vec<Token> = s.leading_comments.iter().filter(|c| c.span.start_line != prev_end_line).cloned().collect();
        prev_end_line = s.end_span.end_line;
        for field in fields(&own) {
            let entries = parse_entries(&comment_lines(&field));
            if entries.is_empty() {
                continue;
            }
            let raw_span = field[0].span.cover(field[field.len() - 1].span);
            let Some(target) = target.clone() else { continue };
            if !first_def {
                diags.push(Diagnostic::warning(
                    codes::DOC_NOT_AT_FIRST_CLAUSE,
                    "documentation must precede the first clause of the predicate",
                    raw_span,
                ));
                continue;
            }
            if let Some(first) = targets.get(&target) {
                diags.push(
                    Diagnostic::warning(codes::DUPLICATE_DOC, "a documentation block already exists for this target", raw_span)
                        .with_related(*first, "first block"),
                );
                continue;
            }
            targets.insert(target.clone(), raw_span);
            docs.push(DocBlock { entries, raw_span, target });
        }
    }
    (docs, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::database::Database;
    use crate::reader::read_all;

    fn docs(src: &str) -> (Vec<DocBlock>, Vec<&'static str>) {
        let (sents, _) = read_all(src, &Database::default());
        let (d, diags) = extract_docs(&sents);
        (d, diags.iter().map(|d| d.code).collect())
    }

    #[test]
    fn line_comment_block_attaches_to_predicate() {
        let (d, diags) = docs("%% Author: A\n%% Description: d\nf(1).");
        assert!(diags.is_empty());
        assert_eq!(d[0].target, DocTarget::Predicate(PredicateIndicator::new("f", 1)));
        assert_eq!(d[0].entries, [("Author:".into(), "A".into()), ("Description:".into(), "d".into())]);
    }

    #[test]
    fn block_comment_attaches_to_module() {
        let (d, _) = docs("/** Author: Jane\n * Description: Lists.\n *   More text.\n */\n:- module(m, []).");
        assert_eq!(d[0].target, DocTarget::Module("m".into()));
        assert_eq!(d[0].get("Description:"), Some("Lists.\nMore text."));
    }

    #[test]
    fn untagged_comments_are_ignored() {
        assert!(docs("% just a note\nf(1).").0.is_empty());
        // the unknown tag alone is not enough, but is kept next to a default one
        assert!(docs("% Since: 1.0\nf(1).").0.is_empty());
        let (d, _) = docs("% Since: 1.0\n% Author: B\nf(1).");
        assert_eq!(d[0].entries[0], ("Since:".into(), "1.0".into()));
    }

    #[test]
    fn misplaced_and_duplicate_blocks_warn() {
        let (d, diags) = docs("f(1).\n% Author: late\nf(2).");
        assert!(d.is_empty());
        assert_eq!(diags, [codes::DOC_NOT_AT_FIRST_CLAUSE]);
        let (d, diags) = docs("% Author: a\n\n% Author: b\nf(1).");
        assert_eq!(d.len(), 1);
        assert_eq!(diags, [codes::DUPLICATE_DOC]);
    }

    #[test]
    fn trailing_comments_belong_to_the_previous_line() {
        let (d, _) = docs("g. % Author: trailing\nf(1).");
        assert!(d.is_empty());
    }

    #[test]
    fn blank_line_splits_line_comment_runs() {
        let (d, _) = docs("% Author: a\n\n% plain\nf(1).");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].get("Author:"), Some("a"));
    }
}
