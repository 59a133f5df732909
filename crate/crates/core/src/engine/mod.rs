//! Post-processing of read sentences.
//!
//! Every sentence the reader produces is dispatched through an
//! [`EngineChain`] before the next one is read. The standard chain executes
//! directives (which may change the operator table) and then stores clauses.

mod directive;
mod loader;
mod repl;
mod solve;

use crate::database::{Database, PredProperty, PredicateIndicator};
use crate::diag::{codes, Diagnostic};
use crate::lexer::{self, Token};
use crate::reader::{Reader, Sentence, SentenceKind};
use crate::term::Term;

pub use directive::{exec_directive, parse_indicator};
pub use loader::{summarize, FsLoader, LoadOutcome, LoadRequest, Loader, ModuleSummary, NoLoader};
pub use repl::repl;
pub use solve::{solve, Binding, SolveError, SolveLimits, Solutions};

/// One link of the chain.
pub trait Handler {
    fn handle(&mut self, sentence: &Sentence, db: &mut Database, loader: &mut dyn Loader) -> Vec<Diagnostic>;
}

/// Executes `:- Goal` sentences.
#[derive(Debug, Default)]
pub struct DirectiveEngine;

impl Handler for DirectiveEngine {
    fn handle(&mut self, sentence: &Sentence, db: &mut Database, loader: &mut dyn Loader) -> Vec<Diagnostic> {
        match sentence.goal() {
            Some(goal) => directive::exec(goal, sentence.span, db, loader),
            None => Vec::new(),
        }
    }
}

/// Stores clauses, facts and grammar rules in the database.
#[derive(Debug, Default)]
pub struct StorageEngine;

impl Handler for StorageEngine {
    fn handle(&mut self, sentence: &Sentence, db: &mut Database, _: &mut dyn Loader) -> Vec<Diagnostic> {
        let (Some(head), body) = (sentence.head(), sentence.body()) else {
            return Vec::new();
        };
        let body = body.cloned().unwrap_or_else(|| Term::atom("true"));
        let result = match sentence.kind {
            SentenceKind::DcgRule => db.assert_dcg(head.clone(), body, sentence.span),
            _ => db.assert_clause(head.clone(), body, sentence.span),
        };
        if let Err(e) = result {
            return vec![Diagnostic::error(codes::INVALID_CLAUSE, e.to_string(), head.span)];
        }
        if let Some((name, arity)) = sentence.defines() {
            let exported = db
                .module
                .as_ref()
                .is_some_and(|m| m.exports.contains(&PredicateIndicator::new(name.as_str(), arity)));
            if exported {
                db.declare(&name, arity, PredProperty::Exported);
            }
        }
        Vec::new()
    }
}

pub struct EngineChain {
    handlers: Vec<Box<dyn Handler>>,
}

impl Default for EngineChain {
    fn default() -> Self {
        EngineChain::standard()
    }
}

impl EngineChain {
    pub fn empty() -> Self {
        EngineChain { handlers: Vec::new() }
    }

    /// Directive execution followed by clause storage.
    pub fn standard() -> Self {
        EngineChain { handlers: vec![Box::new(DirectiveEngine), Box::new(StorageEngine)] }
    }

    pub fn push(&mut self, handler: Box<dyn Handler>) {
        self.handlers.push(handler);
    }

    pub fn dispatch(&mut self, sentence: &Sentence, db: &mut Database, loader: &mut dyn Loader) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for h in &mut self.handlers {
            out.extend(h.handle(sentence, db, loader));
        }
        out
    }
}

/// Everything produced while consulting one source text.
#[derive(Clone, Debug, Default)]
pub struct Consulted {
    pub tokens: Vec<Token>,
    pub sentences: Vec<Sentence>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Read `source` sentence by sentence into `db`, dispatching each sentence
/// before the next is read.
pub fn consult(source: &str, db: &mut Database, chain: &mut EngineChain, loader: &mut dyn Loader) -> Consulted {
    let (tokens, mut diagnostics) = lexer::tokenize(source, db.file);
    let mut sentences = Vec::new();
    let mut reader = Reader::new(&tokens, db.file);
    while let Some(result) = reader.read_sentence(db) {
        diagnostics.extend(result.diagnostics);
        if let Some(sentence) = result.sentence {
            diagnostics.extend(chain.dispatch(&sentence, db, loader));
            sentences.push(sentence);
        }
    }
    Consulted { tokens, sentences, diagnostics }
}
