//! Prolog front end and project analyzer.
//!
//! The pipeline runs in four phases: files are tokenized and read sentence
//! by sentence while directives execute ([`lexer`], [`reader`], [`engine`]),
//! each file is indexed, the indices are linked across the project, and
//! the resulting [`workspace::ProjectModel`] answers editor queries
//! (diagnostics, outline, hover, completion, quick fixes). [`docgen`]
//! renders documentation from the same model.

pub mod catalog;
pub mod database;
pub mod diag;
pub mod docgen;
pub mod engine;
pub mod lexer;
pub mod ops;
pub mod printer;
pub mod reader;
pub mod span;
pub mod term;
pub mod workspace;

pub use database::{Database, PredicateIndicator};
pub use diag::{Diagnostic, Severity};
pub use ops::{Fixity, OperatorDef, OperatorTable};
pub use span::{FileId, SourceSpan};
pub use term::{Shape, Term, TermKind};
