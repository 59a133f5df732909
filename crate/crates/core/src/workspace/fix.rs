use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use super::{ProjectModel, SourceFile};
use crate::catalog::Catalog;
use crate::database::{ImportNames, PredicateIndicator, Resolution};
use crate::diag::{codes, Diagnostic};
use crate::printer::quote_atom;
use crate::reader::SentenceKind;
use crate::span::SourceSpan;

/// Replace `start..end` (bytes) of `path`. `expected` and `file_hash`
/// describe the text the edit was computed against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextEdit {
    pub path: String,
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    pub expected: String,
    pub file_hash: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuickFix {
    pub title: String,
    pub edits: Vec<TextEdit>,
    pub fixes_diagnostic: (&'static str, SourceSpan),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixError {
    #[error("{0} changed since the fix was computed")]
    Stale(String),
    #[error("{0} is not part of the sources")]
    UnknownFile(String),
}

pub(crate) fn text_hash(text: &str) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    text.hash(&mut h);
    h.finish()
}

/// How `from_dir` names `target` in a load directive: relative, without
/// the `.pl` extension.
pub(crate) fn relative_import(from_dir: &str, target: &str) -> String {
    let target = target.strip_suffix(".pl").unwrap_or(target);
    let from: Vec<&str> = from_dir.split('/').filter(|s| !s.is_empty()).collect();
    let to: Vec<&str> = target.split('/').collect();
    let common = from.iter().zip(&to).take_while(|(a, b)| a == b).count();
    let mut parts: Vec<&str> = vec![".."; from.len() - common];
    parts.extend(&to[common..]);
    parts.join("/")
}

fn edit(file: &SourceFile, start: usize, end: usize, replacement: String) -> TextEdit {
    TextEdit {
        path: file.path.clone(),
        start,
        end,
        replacement,
        expected: file.text[start..end].to_string(),
        file_hash: text_hash(&file.text),
    }
}

/// Fixes for one diagnostic of `model`, in a stable order.
pub fn quick_fixes(model: &ProjectModel, diag: &Diagnostic) -> Vec<QuickFix> {
    let Some(file) = model.file_by_id(diag.span.file) else { return Vec::new() };
    let Some(index) = model.index(&file.path) else { return Vec::new() };
    let fixes_diagnostic = (diag.code, diag.span);
    match diag.code {
        codes::UNDEFINED_PREDICATE => {
            let Some(call) = index.calls.iter().find(|c| c.span == diag.span && c.indicator.module.is_none()) else {
                return Vec::new();
            };
            let pi = &call.indicator;
            let (at, lead, trail) = insertion_point(file);
            let import = |target: String| {
                let line = format!(":- use_module({target}, [{}]).", pi.label());
                vec![edit(file, at, at, format!("{lead}{line}{trail}"))]
            };
            let mut fixes = Vec::new();
            for exporter in model.global.exporters(pi).iter().filter(|e| e.path != file.path) {
                let target = quote_atom(&relative_import(super::dir_of(&file.path), &exporter.path));
                fixes.push(QuickFix {
                    title: format!("Import {} from {}", pi.label(), exporter.path),
                    edits: import(target),
                    fixes_diagnostic,
                });
            }
            for entry in Catalog::bundled().iter().filter(|e| !e.is_system() && e.indicator == *pi) {
                fixes.push(QuickFix {
                    title: format!("Import {} from library({})", pi.label(), entry.library),
                    edits: import(format!("library({})", entry.library)),
                    fixes_diagnostic,
                });
            }
            fixes
        }
        codes::NOT_EXPORTED => {
            let found = index.imports.iter().find_map(|r| match &r.names {
                ImportNames::Only(list) => list.iter().find(|(_, s)| *s == diag.span).map(|(pi, _)| (r, pi)),
                ImportNames::All => None,
            });
            let Some((record, pi)) = found else { return Vec::new() };
            let Resolution::Project(path) = &record.resolution else { return Vec::new() };
            match (model.file(path), model.index(path)) {
                (Some(target), Some(tindex)) if tindex.defines(pi) => {
                    let Some(list) = tindex.export_list_span else { return Vec::new() };
                    vec![QuickFix {
                        title: format!("Export {} from {}", pi.label(), path),
                        edits: vec![extend_list(target, list, pi)],
                        fixes_diagnostic,
                    }]
                }
                _ => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

/// After the last directive, or at the top of the file.
fn insertion_point(file: &SourceFile) -> (usize, &'static str, &'static str) {
    match file.sentences.iter().rev().find(|s| s.kind == SentenceKind::Directive) {
        Some(s) => (s.span.end, "\n", ""),
        None => (0, "", "\n"),
    }
}

fn extend_list(file: &SourceFile, list: SourceSpan, pi: &PredicateIndicator) -> TextEdit {
    let text = &file.text[list.start..list.end];
    if text.trim() == "[]" {
        return edit(file, list.start, list.end, format!("[{}]", pi.label()));
    }
    let close = list.end - 1;
    edit(file, close, close, format!(", {}", pi.label()))
}

/// Apply every edit or none. Edits are applied from the end of each file
/// backwards so earlier offsets stay valid.
pub fn apply_fix(fix: &QuickFix, sources: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, FixError> {
    for e in &fix.edits {
        let text = sources.get(&e.path).ok_or_else(|| FixError::UnknownFile(e.path.clone()))?;
        let in_range = e.start <= e.end && e.end <= text.len() && text.is_char_boundary(e.start) && text.is_char_boundary(e.end);
        if text_hash(text) != e.file_hash || !in_range || text[e.start..e.end] != e.expected {
            return Err(FixError::Stale(e.path.clone()));
        }
    }
    let mut out = sources.clone();
    let mut edits: Vec<&TextEdit> = fix.edits.iter().collect();
    edits.sort_by(|a, b| (&a.path, b.start, b.end).cmp(&(&b.path, a.start, a.end)));
    for e in edits {
        out.get_mut(&e.path).expect("checked above").replace_range(e.start..e.end, &e.replacement);
    }
    Ok(out)
}
