//! Browser playground for the reader: tokenize a buffer, read it sentence
//! by sentence with live operator directives, and run a query against it.
//!
//! Every export takes plain strings and returns a JSON string, so the page
//! needs no generated type bindings.

use pldev_core::database::Database;
use pldev_core::engine::{consult, solve, EngineChain, NoLoader, SolveLimits};
use pldev_core::lexer::tokenize;
use pldev_core::printer::pretty_print;
use pldev_core::reader::{parse_term_text, SentenceKind};
use pldev_core::{Diagnostic, FileId, OperatorTable};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize, Debug, PartialEq)]
pub struct TokenView {
    pub kind: String,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct DiagnosticView {
    pub severity: &'static str,
    pub code: &'static str,
    pub message: String,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl From<&Diagnostic> for DiagnosticView {
    fn from(d: &Diagnostic) -> Self {
        DiagnosticView {
            severity: d.severity.as_str(),
            code: d.code,
            message: d.message.clone(),
            line: d.span.start_line,
            col: d.span.start_col,
            end_line: d.span.end_line,
            end_col: d.span.end_col,
        }
    }
}

#[derive(Serialize, Debug, PartialEq)]
pub struct SentenceView {
    pub kind: &'static str,
    pub line: u32,
    /// Operator notation under the operators in force at that point.
    pub text: String,
    /// Functional notation with no operators.
    pub canonical: String,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct ReadView {
    pub sentences: Vec<SentenceView>,
    pub diagnostics: Vec<DiagnosticView>,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct QueryView {
    /// One entry per solution: `Name = value` strings.
    pub answers: Vec<Vec<String>>,
    pub more: bool,
    pub error: Option<String>,
    pub diagnostics: Vec<DiagnosticView>,
}

const MAX_ANSWERS: usize = 20;

pub fn token_views(source: &str) -> Vec<TokenView> {
    let (tokens, _) = tokenize(source, FileId(1));
    tokens
        .into_iter()
        .filter(|t| t.kind != pldev_core::lexer::TokenKind::Layout)
        .map(|t| TokenView { kind: format!("{:?}", t.kind), text: t.text, line: t.span.start_line, col: t.span.start_col })
        .collect()
}

pub fn read_view(source: &str) -> ReadView {
    let mut db = Database::new(FileId(1));
    let consulted = consult(source, &mut db, &mut EngineChain::standard(), &mut NoLoader);
    // Each sentence is printed under the final table; operators declared
    // later in the buffer only make the notation richer.
    let empty = OperatorTable::empty();
    let sentences = consulted
        .sentences
        .iter()
        .map(|s| SentenceView {
            kind: match s.kind {
                SentenceKind::Clause => "clause",
                SentenceKind::Directive => "directive",
                SentenceKind::DcgRule => "grammar rule",
                SentenceKind::Fact => "fact",
            },
            line: s.span.start_line,
            text: pretty_print(&s.term, &db.ops),
            canonical: pretty_print(&s.term, &empty),
        })
        .collect();
    ReadView { sentences, diagnostics: consulted.diagnostics.iter().map(DiagnosticView::from).collect() }
}

pub fn query_view(program: &str, goal: &str) -> QueryView {
    let mut db = Database::new(FileId(1));
    let consulted = consult(program, &mut db, &mut EngineChain::standard(), &mut NoLoader);
    let diagnostics = consulted.diagnostics.iter().map(DiagnosticView::from).collect();
    let mut view = QueryView { answers: Vec::new(), more: false, error: None, diagnostics };
    let goal = goal.trim().trim_end_matches('.');
    let term = match parse_term_text(goal, &db) {
        Ok(t) => t,
        Err(d) => {
            view.error = Some(format!("syntax error: {}", d.message));
            return view;
        }
    };
    let mut solutions = solve(&term, &db, SolveLimits::default());
    while view.answers.len() < MAX_ANSWERS {
        match solutions.next() {
            Some(Ok(b)) => {
                view.answers.push(b.vars.iter().map(|(n, t)| format!("{n} = {}", pretty_print(t, &db.ops))).collect())
            }
            Some(Err(e)) => {
                view.error = Some(e.to_string());
                break;
            }
            None => break,
        }
    }
    view.more = view.error.is_none() && view.answers.len() == MAX_ANSWERS && solutions.has_more();
    view
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("views serialize")
}

#[wasm_bindgen]
pub fn tokens(source: &str) -> String {
    json(&token_views(source))
}

#[wasm_bindgen]
pub fn read(source: &str) -> String {
    json(&read_view(source))
}

#[wasm_bindgen]
pub fn query(program: &str, goal: &str) -> String {
    json(&query_view(program, goal))
}
