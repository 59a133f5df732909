//! Runtime state consulted and updated while a file is read: operators,
//! clauses, module declaration, imports and flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::ops::{OpError, OperatorDef, OperatorTable};
use crate::span::{FileId, SourceSpan};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateIndicator {
    pub module: Option<String>,
    pub name: String,
    pub arity: usize,
}

impl PredicateIndicator {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredicateIndicator { module: None, name: name.into(), arity }
    }

    pub fn key(&self) -> (String, usize) {
        (self.name.clone(), self.arity)
    }

    /// `name/arity` with the name quoted when needed, module omitted.
    pub fn label(&self) -> String {
        format!("{}/{}", crate::printer::quote_atom(&self.name), self.arity)
    }
}

impl fmt::Display for PredicateIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = &self.module {
            write!(f, "{}:", crate::printer::quote_atom(m))?;
        }
        f.write_str(&self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredProperty {
    Dynamic,
    Discontiguous,
    Exported,
    Dcg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub head: Term,
    pub body: Term,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateEntry {
    pub indicator: PredicateIndicator,
    pub clauses: Vec<Clause>,
    pub properties: BTreeSet<PredProperty>,
}

/// What a load directive names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoadTarget {
    /// A path as written, without extension resolution.
    File(String),
    /// `library(Name)`.
    Library(String),
}

impl fmt::Display for LoadTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadTarget::File(p) => f.write_str(p),
            LoadTarget::Library(l) => write!(f, "library({l})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ImportKind {
    UseModule,
    EnsureLoaded,
    Consult,
    Include,
}

impl ImportKind {
    pub fn directive_name(self) -> &'static str {
        match self {
            ImportKind::UseModule => "use_module",
            ImportKind::EnsureLoaded => "ensure_loaded",
            ImportKind::Consult => "consult",
            ImportKind::Include => "include",
        }
    }
}

/// Where a load directive ended up.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolution {
    Unresolved,
    /// A file that belongs to the project being analyzed.
    Project(String),
    /// A file outside the project, summarized at load time.
    External { path: PathBuf, module: Option<String>, exports: Vec<PredicateIndicator> },
    /// A library known from the built-in catalog.
    Catalog(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ImportNames {
    All,
    Only(Vec<(PredicateIndicator, SourceSpan)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportRecord {
    pub kind: ImportKind,
    pub target: LoadTarget,
    pub target_span: SourceSpan,
    pub names: ImportNames,
    pub resolution: Resolution,
    /// The whole directive sentence.
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleInfo {
    pub name: String,
    pub exports: BTreeSet<PredicateIndicator>,
    pub exported_ops: Vec<OperatorDef>,
    pub imports: Vec<ImportRecord>,
    pub defining_file: FileId,
}

#[derive(Debug, Error, PartialEq)]
pub enum DbError {
    #[error("instantiation error: clause head is a variable")]
    HeadUnbound,
    #[error("type error: callable expected, found {0}")]
    NotCallable(String),
    #[error(transparent)]
    Operator(#[from] OpError),
}

#[derive(Clone, Debug)]
pub struct Database {
    pub ops: OperatorTable,
    preds: BTreeMap<(String, usize), PredicateEntry>,
    pub module: Option<ModuleInfo>,
    pub imports: Vec<ImportRecord>,
    pub flags: BTreeMap<String, String>,
    /// Load targets already consulted once (`ensure_loaded`).
    pub loaded: BTreeSet<String>,
    /// Operators declared by this file's own `op/3` directives.
    pub op_decls: Vec<(OperatorDef, SourceSpan)>,
    pub file: FileId,
}

impl Default for Database {
    fn default() -> Self {
        Database::new(FileId::default())
    }
}

impl Database {
    pub fn new(file: FileId) -> Self {
        Database {
            ops: OperatorTable::default(),
            preds: BTreeMap::new(),
            module: None,
            imports: Vec::new(),
            flags: BTreeMap::new(),
            loaded: BTreeSet::new(),
            op_decls: Vec::new(),
            file,
        }
    }

    pub fn add_operator(&mut self, def: OperatorDef) -> Result<(), DbError> {
        Ok(self.ops.add(def)?)
    }

    pub fn assert_clause(&mut self, head: Term, body: Term, span: SourceSpan) -> Result<(), DbError> {
        self.assert_with(head, body, span, None)
    }

    /// Store a grammar rule under its translated arity (declared + 2).
    pub fn assert_dcg(&mut self, head: Term, body: Term, span: SourceSpan) -> Result<(), DbError> {
        self.assert_with(head, body, span, Some(PredProperty::Dcg))
    }

    fn assert_with(
        &mut self,
        head: Term,
        body: Term,
        span: SourceSpan,
        property: Option<PredProperty>,
    ) -> Result<(), DbError> {
        if head.is_var() {
            return Err(DbError::HeadUnbound);
        }
        if !head.is_callable() {
            return Err(DbError::NotCallable(crate::printer::pretty_print(&head, &self.ops)));
        }
        let (name, arity) = head.name_arity().expect("callable");
        let arity = if property == Some(PredProperty::Dcg) { arity + 2 } else { arity };
        let entry = self.entry(name, arity);
        entry.properties.extend(property);
        entry.clauses.push(Clause { head, body, span });
        Ok(())
    }

    fn entry(&mut self, name: &str, arity: usize) -> &mut PredicateEntry {
        let module = self.module.as_ref().map(|m| m.name.clone());
        self.preds.entry((name.to_string(), arity)).or_insert_with(|| PredicateEntry {
            indicator: PredicateIndicator { module, name: name.to_string(), arity },
            clauses: Vec::new(),
            properties: BTreeSet::new(),
        })
    }

    /// Mark a predicate with a property, creating an empty entry if needed.
    pub fn declare(&mut self, name: &str, arity: usize, property: PredProperty) {
        self.entry(name, arity).properties.insert(property);
    }

    /// `None` means never defined or declared; a dynamic predicate without
    /// clauses yields an entry with zero clauses.
    pub fn lookup(&self, indicator: &PredicateIndicator) -> Option<&PredicateEntry> {
        self.preds.get(&(indicator.name.clone(), indicator.arity))
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredicateEntry> {
        self.preds.values()
    }

    pub fn flag(&self, name: &str) -> Option<&str> {
        self.flags.get(name).map(String::as_str)
    }
}
