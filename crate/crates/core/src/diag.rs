//! Positioned diagnostics shared by every phase.

use std::fmt;

use crate::span::SourceSpan;

/// Stable machine identifiers for diagnostics.
pub mod codes {
    pub const INVALID_TOKEN: &str = "invalid_token";
    pub const SYNTAX_ERROR: &str = "syntax_error";
    pub const MISSING_END: &str = "missing_end";
    pub const UNBALANCED_DELIMITER: &str = "unbalanced_delimiter";
    pub const OPERATOR_CLASH: &str = "operator_clash";
    pub const DIRECTIVE_ERROR: &str = "directive_error";
    pub const INVALID_CLAUSE: &str = "invalid_clause";
    pub const UNKNOWN_DIRECTIVE: &str = "unknown_directive";
    pub const FILE_NOT_FOUND: &str = "file_not_found";
    pub const UNDEFINED_PREDICATE: &str = "undefined_predicate";
    pub const NOT_EXPORTED: &str = "not_exported";
    pub const UNRESOLVED_IMPORT: &str = "unresolved_import";
    pub const DISCONTIGUOUS_CLAUSES: &str = "discontiguous_clauses";
    pub const SINGLETON_VARIABLE: &str = "singleton_variable";
    pub const DUPLICATE_DOC: &str = "duplicate_doc";
    pub const DOC_NOT_AT_FIRST_CLAUSE: &str = "doc_not_at_first_clause";
    pub const READ_ERROR: &str = "read_error";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: SourceSpan,
    pub related: Vec<(SourceSpan, String)>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic { severity, code, message: message.into(), span, related: Vec::new() }
    }

    pub fn error(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self::new(Severity::Error, code, message, span)
    }

    pub fn warning(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self::new(Severity::Warning, code, message, span)
    }

    pub fn with_related(mut self, span: SourceSpan, note: impl Into<String>) -> Self {
        self.related.push((span, note.into()));
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}
