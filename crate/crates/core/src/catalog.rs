//! Synopses of built-in and common library predicates.
//!
//! The bundled catalog is plain text: records separated by blank lines,
//! each with an `name/arity library` line, a synopsis line and one
//! `Arg: description` line per argument. Lines starting with `#` are
//! comments.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::database::PredicateIndicator;

/// Library name of predicates that need no import.
pub const SYSTEM: &str = "system";

const BUNDLED: &str = include_str!("../data/catalog.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub indicator: PredicateIndicator,
    pub library: String,
    pub synopsis: String,
    pub args: Vec<(String, String)>,
}

impl CatalogEntry {
    pub fn is_system(&self) -> bool {
        self.library == SYSTEM
    }

    /// Synopsis followed by one indented line per argument.
    pub fn describe(&self) -> String {
        let mut out = self.synopsis.clone();
        if !self.is_system() {
            out.push_str(&format!("  [library({})]", self.library));
        }
        for (name, text) in &self.args {
            out.push_str(&format!("\n  {name}: {text}"));
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    entries: BTreeMap<(String, usize), CatalogEntry>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("catalog line {line}: {message}")]
pub struct CatalogError {
    pub line: usize,
    pub message: String,
}

impl Catalog {
    pub fn bundled() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::parse(BUNDLED).expect("bundled catalog is well-formed"))
    }

    pub fn parse(text: &str) -> Result<Catalog, CatalogError> {
        let mut entries = BTreeMap::new();
        let mut record: Vec<(usize, &str)> = Vec::new();
        let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        for (no, line) in lines.chain(std::iter::once((0, ""))) {
            if line.starts_with('#') {
                continue;
            }
            if !line.is_empty() {
                record.push((no, line));
                continue;
            }
            if record.is_empty() {
                continue;
            }
            let entry = parse_record(&record)?;
            entries.insert(entry.indicator.key(), entry);
            record.clear();
        }
        Ok(Catalog { entries })
    }

    pub fn get(&self, name: &str, arity: usize) -> Option<&CatalogEntry> {
        self.entries.get(&(name.to_string(), arity))
    }

    /// Built-ins visible without any import.
    pub fn is_builtin(&self, name: &str, arity: usize) -> bool {
        self.get(name, arity).is_some_and(CatalogEntry::is_system)
    }

    pub fn library_exports(&self, library: &str) -> Vec<&CatalogEntry> {
        self.entries.values().filter(|e| e.library == library).collect()
    }

    pub fn has_library(&self, library: &str) -> bool {
        library != SYSTEM && self.entries.values().any(|e| e.library == library)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.values()
    }
}

fn parse_record(lines: &[(usize, &str)]) -> Result<CatalogEntry, CatalogError> {
    let (no, head) = lines[0];
    let err = |line, message: &str| CatalogError { line, message: message.to_string() };
    let (indicator, library) = head.rsplit_once(' ').ok_or_else(|| err(no, "expected `name/arity library`"))?;
    let (name, arity) = indicator.rsplit_once('/').ok_or_else(|| err(no, "expected name/arity"))?;
    let arity = arity.parse().map_err(|_| err(no, "arity is not a number"))?;
    let &(_, synopsis) = lines.get(1).ok_or_else(|| err(no, "missing synopsis line"))?;
    let mut args = Vec::new();
    for &(n, line) in &lines[2..] {
        let (arg, text) = line.split_once(": ").ok_or_else(|| err(n, "expected `Arg: description`"))?;
        args.push((arg.to_string(), text.to_string()));
    }
    Ok(CatalogEntry {
        indicator: PredicateIndicator::new(name, arity),
        library: library.to_string(),
        synopsis: synopsis.to_string(),
        args,
    })
}
