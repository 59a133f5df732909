use std::collections::HashSet;

use super::index::{Definition, FileIndex};
use super::link::{import_target, Origin};
use super::{dir_of, ProjectModel, SourceFile};
use crate::catalog::Catalog;
use crate::database::{PredicateIndicator, Resolution};
use crate::docgen::DocTarget;
use crate::lexer::{is_alnum, TokenKind};
use crate::ops::{OpClass, OperatorTable};
use crate::printer::{pretty_print, print_with_fresh_vars, quote_atom};
use crate::reader::SentenceKind;
use crate::span::SourceSpan;
use crate::term::{Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("{0} is not part of the project")]
    UnknownFile(String),
    #[error("offset {offset} is outside the file (length {len})")]
    OutOfRange { offset: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutlineKind {
    Module,
    ImportDirective,
    ExportedPredicate,
    PrivatePredicate,
    DcgNonterminal,
}

impl OutlineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutlineKind::Module => "module",
            OutlineKind::ImportDirective => "import",
            OutlineKind::ExportedPredicate => "exported",
            OutlineKind::PrivatePredicate => "private",
            OutlineKind::DcgNonterminal => "dcg",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutlineItem {
    pub kind: OutlineKind,
    pub label: String,
    pub target_span: SourceSpan,
    pub children: Vec<OutlineItem>,
}

fn lookup<'a>(model: &'a ProjectModel, path: &str) -> Result<(&'a SourceFile, &'a FileIndex), QueryError> {
    match (model.file(path), model.index(path)) {
        (Some(f), Some(i)) => Ok((f, i)),
        _ => Err(QueryError::UnknownFile(path.to_string())),
    }
}

fn check_offset(file: &SourceFile, offset: usize) -> Result<(), QueryError> {
    if offset > file.text.len() || !file.text.is_char_boundary(offset) {
        return Err(QueryError::OutOfRange { offset, len: file.text.len() });
    }
    Ok(())
}

/// Module, imports and predicates of one file in source order. Each
/// predicate points at its first clause.
pub fn outline(model: &ProjectModel, path: &str) -> Result<Vec<OutlineItem>, QueryError> {
    let (_, index) = lookup(model, path)?;
    let mut items = Vec::new();
    if let (Some(m), Some(span)) = (&index.module, index.module_span) {
        items.push(OutlineItem { kind: OutlineKind::Module, label: m.name.clone(), target_span: span, children: vec![] });
    }
    for record in &index.imports {
        items.push(OutlineItem {
            kind: OutlineKind::ImportDirective,
            label: format!("{}({})", record.kind.directive_name(), record.target),
            target_span: record.span,
            children: vec![],
        });
    }
    for def in index.defined.values() {
        let kind = if def.dcg {
            OutlineKind::DcgNonterminal
        } else if index.module.is_some() && index.exports(&def.indicator) {
            OutlineKind::ExportedPredicate
        } else {
            OutlineKind::PrivatePredicate
        };
        items.push(OutlineItem { kind, label: def.label(), target_span: def.clause_spans[0], children: vec![] });
    }
    items.sort_by_key(|i| (i.target_span.start, i.kind));
    Ok(items)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoverMode {
    Definition,
    Doc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoverInfo {
    pub text: String,
    pub span: SourceSpan,
}

/// Deepest callable subterm whose functor token covers `offset`.
fn term_at(t: &Term, offset: usize) -> Option<&Term> {
    let mut best = None;
    t.walk(&mut |s| {
        if s.functor_span.contains(offset) && !matches!(s.kind, TermKind::List { .. }) && s.name_arity().is_some() {
            best = Some(s);
        }
    });
    best
}

/// The predicate named at `offset`: a call, a clause head or failing
/// those the plain name and arity of the term there.
fn indicator_at(file: &SourceFile, index: &FileIndex, offset: usize) -> Option<(PredicateIndicator, SourceSpan)> {
    if let Some(c) = index.calls.iter().find(|c| c.functor_span.contains(offset)) {
        return Some((c.indicator.clone(), c.functor_span));
    }
    for def in index.defined.values() {
        if let Some(h) = def.head_spans.iter().find(|h| h.contains(offset)) {
            return Some((def.indicator.clone(), *h));
        }
    }
    let sentence = file.sentences.iter().find(|s| s.span.contains(offset))?;
    let t = term_at(&sentence.term, offset)?;
    let (name, arity) = t.name_arity()?;
    Some((PredicateIndicator::new(name, arity), t.functor_span))
}

/// Where a predicate visible from `index` is defined in the project.
fn definition_of<'a>(
    model: &'a ProjectModel,
    index: &'a FileIndex,
    pi: &PredicateIndicator,
) -> Option<(&'a FileIndex, &'a Definition)> {
    let bare = PredicateIndicator::new(pi.name.as_str(), pi.arity);
    if let Some(m) = &pi.module {
        let target = model.index(model.global.modules.get(m)?)?;
        return target.defined.get(&bare).map(|d| (target, d));
    }
    if let Some(d) = index.defined.get(&bare) {
        return Some((index, d));
    }
    match model.global.import_origin(&index.path, &bare)? {
        Origin::Project(path) => {
            let target = model.index(path)?;
            target.defined.get(&bare).map(|d| (target, d))
        }
        _ => None,
    }
}

fn synopsis_of(model: &ProjectModel, owner: &FileIndex, def: &Definition) -> String {
    let file = model.file(&owner.path).expect("indexed file");
    let sentence = &file.sentences[def.first_sentence];
    let head = sentence.head().expect("defining sentence");
    let mut text = pretty_print(head, &file.db.ops);
    match sentence.kind {
        SentenceKind::Clause => text.push_str(" :- ..."),
        SentenceKind::DcgRule => text.push_str(" --> ..."),
        _ => {}
    }
    text
}

fn user_ops(file: &SourceFile, name: &str) -> Vec<String> {
    let defaults = OperatorTable::default();
    [OpClass::Prefix, OpClass::Infix, OpClass::Postfix]
        .into_iter()
        .filter_map(|class| {
            let def = file.db.ops.lookup(name, class)?;
            (defaults.lookup(name, class) != Some(def)).then(|| def.to_string())
        })
        .collect()
}

pub fn hover(model: &ProjectModel, path: &str, offset: usize, mode: HoverMode) -> Result<Option<HoverInfo>, QueryError> {
    let (file, index) = lookup(model, path)?;
    check_offset(file, offset)?;
    let Some(token) = file.tokens.iter().find(|t| t.span.contains(offset)) else { return Ok(None) };
    if token.kind.is_trivia() {
        return Ok(None);
    }
    Ok(match mode {
        HoverMode::Definition => hover_definition(model, file, index, offset, token),
        HoverMode::Doc => hover_doc(model, file, index, offset),
    })
}

fn hover_definition(
    model: &ProjectModel,
    file: &SourceFile,
    index: &FileIndex,
    offset: usize,
    token: &crate::lexer::Token,
) -> Option<HoverInfo> {
    if let Some(name) = token.atom_name() {
        let ops = user_ops(file, &name);
        if !ops.is_empty() {
            return Some(HoverInfo { text: ops.join("\n"), span: token.span });
        }
    }
    if let Some(record) = index.imports.iter().find(|r| r.target_span.contains(offset)) {
        let exports: Vec<String> = match &record.resolution {
            Resolution::Project(_) => import_target(&model.global, &model.indices, record)?
                .export_set()
                .iter()
                .map(PredicateIndicator::label)
                .collect(),
            Resolution::Catalog(lib) => {
                Catalog::bundled().library_exports(lib).iter().map(|e| e.indicator.label()).collect()
            }
            Resolution::External { exports, .. } => exports.iter().map(PredicateIndicator::label).collect(),
            Resolution::Unresolved => return None,
        };
        let text = format!("{} exports {}", record.target, if exports.is_empty() { "nothing".into() } else { exports.join(", ") });
        return Some(HoverInfo { text, span: record.target_span });
    }
    let (pi, span) = indicator_at(file, index, offset)?;
    if let Some((owner, def)) = definition_of(model, index, &pi) {
        let line = def.clause_spans[0].start_line;
        let place = if owner.path == index.path { format!("line {line}") } else { format!("{}:{line}", owner.path) };
        return Some(HoverInfo { text: format!("{} defined at {place}", synopsis_of(model, owner, def)), span });
    }
    let entry = Catalog::bundled().get(&pi.name, pi.arity)?;
    Some(HoverInfo { text: entry.describe(), span })
}

fn hover_doc(model: &ProjectModel, file: &SourceFile, index: &FileIndex, offset: usize) -> Option<HoverInfo> {
    if let (Some(m), Some(span)) = (&index.module, index.module_span) {
        if span.contains(offset) {
            let block = index.doc(&DocTarget::Module(m.name.clone()))?;
            return Some(HoverInfo { text: block.render(), span });
        }
    }
    let (pi, span) = indicator_at(file, index, offset)?;
    let (owner, def) = definition_of(model, index, &pi)?;
    let block = owner.doc(&DocTarget::Predicate(def.indicator.clone()))?;
    Some(HoverInfo { text: block.render(), span })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompletionKind {
    Predicate,
    Module,
    Dcg,
    Variable,
    Keyword,
}

impl CompletionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CompletionKind::Predicate => "predicate",
            CompletionKind::Module => "module",
            CompletionKind::Dcg => "dcg",
            CompletionKind::Variable => "variable",
            CompletionKind::Keyword => "keyword",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionItem {
    pub label: String,
    pub kind: CompletionKind,
    pub synopsis: String,
    pub insert_text: String,
}

const KEYWORDS: &[(&str, usize)] = &[
    ("discontiguous", 1),
    ("dynamic", 1),
    ("ensure_loaded", 1),
    ("include", 1),
    ("initialization", 1),
    ("module", 2),
    ("multifile", 1),
    ("op", 3),
    ("set_prolog_flag", 2),
    ("use_module", 1),
    ("use_module", 2),
];

const IMPORT_DIRECTIVES: &[&str] = &["use_module", "ensure_loaded", "consult", "include"];

fn template(name: &str, arity: usize) -> String {
    let name = quote_atom(name);
    if arity == 0 {
        name
    } else {
        format!("{name}({})", vec!["_"; arity].join(", "))
    }
}

struct Candidate {
    item: CompletionItem,
    /// Name the prefix is matched against.
    key: String,
    locality: u8,
}

/// Where the completion happens, judged from the tokens before the prefix.
enum Position {
    ImportArgument,
    LibraryArgument,
    DirectiveStart,
    Other,
}

fn position(file: &SourceFile, prefix_start: usize) -> Position {
    let before: Vec<&crate::lexer::Token> =
        file.tokens.iter().filter(|t| t.span.end <= prefix_start && !t.kind.is_trivia()).collect();
    let n = before.len();
    if n >= 2 && matches!(before[n - 1].kind, TokenKind::OpenParenCT) {
        let callee = before[n - 2].atom_name().unwrap_or_default();
        if callee == "library" {
            return Position::LibraryArgument;
        }
        if IMPORT_DIRECTIVES.contains(&callee.as_str()) {
            return Position::ImportArgument;
        }
    }
    if n >= 1 && before[n - 1].text == ":-" && (n == 1 || before[n - 2].kind == TokenKind::End) {
        return Position::DirectiveStart;
    }
    Position::Other
}

/// Proposals for the identifier ending at `offset`.
pub fn complete(model: &ProjectModel, path: &str, offset: usize) -> Result<Vec<CompletionItem>, QueryError> {
    let (file, index) = lookup(model, path)?;
    check_offset(file, offset)?;
    let text = &file.text[..offset];
    let start = text.char_indices().rev().take_while(|&(_, c)| is_alnum(c)).last().map(|(i, _)| i).unwrap_or(offset);
    let prefix = &text[start..];
    let catalog = Catalog::bundled();
    let mut pool: Vec<Candidate> = Vec::new();

    match position(file, start) {
        Position::LibraryArgument => {
            let mut libs: Vec<&str> = catalog.iter().filter(|e| !e.is_system()).map(|e| e.library.as_str()).collect();
            libs.dedup();
            for lib in libs {
                pool.push(module_item(lib, format!("library({lib})"), lib.to_string(), 2));
            }
        }
        Position::ImportArgument => {
            let dir = dir_of(&index.path);
            for other in model.indices.iter().filter(|i| i.path != index.path) {
                let rel = super::fix::relative_import(dir, &other.path);
                let synopsis = match &other.module {
                    Some(m) => format!("module {} in {}", m.name, other.path),
                    None => format!("file {}", other.path),
                };
                pool.push(module_item(&rel, synopsis, quote_atom(&rel), 0));
            }
            pool.push(module_item("library", "library(Name)".into(), "library(_)".into(), 2));
        }
        pos => {
            if matches!(pos, Position::DirectiveStart) {
                for &(name, arity) in KEYWORDS {
                    let item = CompletionItem {
                        label: format!("{name}/{arity}"),
                        kind: CompletionKind::Keyword,
                        synopsis: format!("directive {name}/{arity}"),
                        insert_text: template(name, arity),
                    };
                    pool.push(Candidate { item, key: name.to_string(), locality: 0 });
                }
            }
            variables(file, start, offset, &mut pool);
            predicates(model, index, &mut pool);
        }
    }

    let mut scored: Vec<(u8, u8, String, CompletionItem)> = pool
        .into_iter()
        .filter(|c| c.key.starts_with(prefix))
        .map(|c| (u8::from(c.key != prefix), c.locality, c.item.label.clone(), c.item))
        .collect();
    scored.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
    let mut seen = HashSet::new();
    Ok(scored
        .into_iter()
        .map(|s| s.3)
        .filter(|i| seen.insert((i.label.clone(), i.kind)))
        .take(model.config.completion_cap)
        .collect())
}

fn module_item(key: &str, synopsis: String, insert_text: String, locality: u8) -> Candidate {
    let item = CompletionItem { label: key.to_string(), kind: CompletionKind::Module, synopsis, insert_text };
    Candidate { item, key: key.to_string(), locality }
}

/// Variables of the sentence around the cursor, read from the tokens so
/// that a clause still being typed is covered too.
fn variables(file: &SourceFile, prefix_start: usize, offset: usize, pool: &mut Vec<Candidate>) {
    let tokens = &file.tokens;
    let from = tokens.iter().rposition(|t| t.kind == TokenKind::End && t.span.end <= prefix_start).map_or(0, |i| i + 1);
    let to = tokens[from..].iter().position(|t| t.kind == TokenKind::End).map_or(tokens.len(), |i| from + i);
    let mut seen = HashSet::new();
    for t in &tokens[from..to] {
        let typed = t.span.start == prefix_start && t.span.end == offset;
        if t.kind != TokenKind::Variable || typed || t.text == "_" || !seen.insert(t.text.as_str()) {
            continue;
        }
        let item = CompletionItem {
            label: t.text.clone(),
            kind: CompletionKind::Variable,
            synopsis: "variable".into(),
            insert_text: t.text.clone(),
        };
        pool.push(Candidate { item, key: t.text.clone(), locality: 0 });
    }
}

fn predicates(model: &ProjectModel, index: &FileIndex, pool: &mut Vec<Candidate>) {
    let push = |pool: &mut Vec<Candidate>, def: &Definition, owner: &FileIndex, locality: u8| {
        let name = &def.indicator.name;
        let file = model.file(&owner.path).expect("indexed file");
        let head = file.sentences[def.first_sentence].head().expect("defining sentence");
        let (kind, arity) = if def.dcg {
            (CompletionKind::Dcg, def.indicator.arity - 2)
        } else {
            (CompletionKind::Predicate, def.indicator.arity)
        };
        let item = CompletionItem {
            label: def.label(),
            kind,
            synopsis: print_with_fresh_vars(head, &file.db.ops),
            insert_text: template(name, arity),
        };
        pool.push(Candidate { item, key: name.clone(), locality });
    };
    for def in index.defined.values() {
        push(pool, def, index, 0);
    }
    let catalog = Catalog::bundled();
    if let Some(imported) = model.global.imported.get(&index.path) {
        for (pi, origin) in imported {
            let owner = match origin {
                Origin::Project(path) => model.index(path),
                _ => None,
            };
            match owner.and_then(|o| o.defined.get(pi).map(|d| (o, d))) {
                Some((o, def)) => push(pool, def, o, 1),
                None => {
                    let synopsis = catalog.get(&pi.name, pi.arity).map(|e| e.synopsis.clone()).unwrap_or_default();
                    let item = CompletionItem {
                        label: pi.label(),
                        kind: CompletionKind::Predicate,
                        synopsis,
                        insert_text: template(&pi.name, pi.arity),
                    };
                    pool.push(Candidate { item, key: pi.name.clone(), locality: 1 });
                }
            }
        }
    }
    for e in catalog.iter().filter(|e| e.is_system()) {
        let item = CompletionItem {
            label: e.indicator.label(),
            kind: CompletionKind::Predicate,
            synopsis: e.synopsis.clone(),
            insert_text: template(&e.indicator.name, e.indicator.arity),
        };
        pool.push(Candidate { item, key: e.indicator.name.clone(), locality: 2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workspace::tests::project;

    fn offset_of(m: &ProjectModel, path: &str, needle: &str) -> usize {
        m.file(path).unwrap().text.find(needle).unwrap()
    }

    const MODULE_FIXTURE: &str =
        ":- module(m, [f/1]).\n:- use_module(library(lists)).\nf(X) :- g, member(X, [1]).\ng.\ns(X) --> [X].\n";

    #[test]
    fn outline_of_a_module() {
        let m = project(&[("m.pl", MODULE_FIXTURE)]);
        let got: Vec<_> = outline(&m, "m.pl").unwrap().into_iter().map(|i| (i.kind, i.label)).collect();
        assert_eq!(
            got,
            [
                (OutlineKind::Module, "m".to_string()),
                (OutlineKind::ImportDirective, "use_module(library(lists))".to_string()),
                (OutlineKind::ExportedPredicate, "f/1".to_string()),
                (OutlineKind::PrivatePredicate, "g/0".to_string()),
                (OutlineKind::DcgNonterminal, "s//1".to_string()),
            ]
        );
        assert_eq!(outline(&m, "nope.pl"), Err(QueryError::UnknownFile("nope.pl".into())));
    }

    #[test]
    fn outline_of_plain_and_empty_files() {
        let m = project(&[("a.pl", "fact(1).\n"), ("e.pl", "")]);
        assert_eq!(outline(&m, "a.pl").unwrap()[0].kind, OutlineKind::PrivatePredicate);
        assert!(outline(&m, "e.pl").unwrap().is_empty());
    }

    #[test]
    fn hover_on_definition_operator_and_builtin() {
        let src = ":- op(700, xfx, ===).\nf(X) :- X === 1.\nX === X.\nmain :- f(1), atom_length(a, _).\n";
        let m = project(&[("a.pl", src)]);
        let at = |needle: &str, delta: usize| {
            hover(&m, "a.pl", offset_of(&m, "a.pl", needle) + delta, HoverMode::Definition).unwrap().map(|h| h.text)
        };
        assert_eq!(at("f(1)", 0).unwrap(), "f(X) :- ... defined at line 2");
        assert_eq!(at("=== 1", 1).unwrap(), "op(700, xfx, ===)");
        assert!(at("atom_length", 2).unwrap().starts_with("atom_length("));
        assert_eq!(at(" f(1)", 0), None);
    }

    #[test]
    fn hover_across_files_and_imports() {
        let m = project(&[
            ("a.pl", ":- use_module(b).\nmain :- f(1).\n"),
            ("b.pl", "%% Description: the f.\n:- module(b, [f/1]).\n%% Author: me\nf(_).\n"),
        ]);
        let call = offset_of(&m, "a.pl", "f(1)");
        let h = hover(&m, "a.pl", call, HoverMode::Definition).unwrap().unwrap();
        assert_eq!(h.text, "f(_) defined at b.pl:4");
        let doc = hover(&m, "a.pl", call, HoverMode::Doc).unwrap().unwrap();
        assert_eq!(doc.text, "Author: me");
        let target = offset_of(&m, "a.pl", "b)");
        assert_eq!(hover(&m, "a.pl", target, HoverMode::Definition).unwrap().unwrap().text, "b exports f/1");
        let module = hover(&m, "b.pl", offset_of(&m, "b.pl", "module"), HoverMode::Doc).unwrap().unwrap();
        assert_eq!(module.text, "Description: the f.");
    }

    #[test]
    fn hover_on_comment_and_out_of_range() {
        let m = project(&[("a.pl", "% note\nf.\n")]);
        assert_eq!(hover(&m, "a.pl", 2, HoverMode::Definition), Ok(None));
        assert!(matches!(hover(&m, "a.pl", 99, HoverMode::Doc), Err(QueryError::OutOfRange { .. })));
    }

    fn labels(items: &[CompletionItem]) -> Vec<&str> {
        items.iter().map(|i| i.label.as_str()).collect()
    }

    #[test]
    fn completes_imported_predicates() {
        let src = ":- use_module(library(lists)).\nt(L) :- me";
        let m = project(&[("a.pl", src)]);
        let items = complete(&m, "a.pl", src.len()).unwrap();
        let member = items.iter().find(|i| i.label == "member/2").expect("member/2");
        assert_eq!(member.insert_text, "member(_, _)");
        assert!(!member.synopsis.is_empty());
        assert!(complete(&m, "a.pl", 0).unwrap().len() <= 50);
    }

    #[test]
    fn completes_variables_and_nothing() {
        let src = "p(X1, Y) :- q(X";
        let m = project(&[("a.pl", src)]);
        assert_eq!(labels(&complete(&m, "a.pl", src.len()).unwrap()), ["X1"]);
        let src = "p :- zzz";
        let m = project(&[("a.pl", src)]);
        assert!(complete(&m, "a.pl", src.len()).unwrap().is_empty());
    }

    #[test]
    fn completes_modules_in_import_position() {
        let src = ":- use_module(";
        let m = project(&[("a.pl", src), ("util/b.pl", ":- module(bee, []).\n")]);
        let items = complete(&m, "a.pl", src.len()).unwrap();
        assert_eq!(labels(&items), ["util/b", "library"]);
        assert_eq!(items[0].insert_text, "'util/b'");
        let src = ":- use_module(library(li";
        let m = project(&[("a.pl", src)]);
        assert_eq!(labels(&complete(&m, "a.pl", src.len()).unwrap()), ["lists"]);
    }

    #[test]
    fn exact_match_ranks_first() {
        let src = "app.\napp_x.\n:- app";
        let m = project(&[("a.pl", src)]);
        let items = complete(&m, "a.pl", src.len()).unwrap();
        assert_eq!(labels(&items), ["app/0", "app_x/0"]);
    }
}
