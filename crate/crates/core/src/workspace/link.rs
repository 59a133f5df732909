use std::collections::BTreeMap;

use super::index::FileIndex;
use crate::catalog::Catalog;
use crate::database::{ImportNames, ImportRecord, LoadTarget, PredicateIndicator, Resolution};
use crate::diag::{codes, Diagnostic, Severity};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exporter {
    pub path: String,
    pub module: Option<String>,
}

/// Where an imported predicate comes from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    Project(String),
    Library(String),
    External(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GlobalIndex {
    /// Path to position in the index list.
    pub files: BTreeMap<String, usize>,
    /// Module name to defining file.
    pub modules: BTreeMap<String, String>,
    /// Who makes each predicate available: module export lists plus the
    /// top-level definitions of files that declare no module.
    pub exports: BTreeMap<PredicateIndicator, Vec<Exporter>>,
    /// Per file, the predicates its imports make visible.
    pub imported: BTreeMap<String, BTreeMap<PredicateIndicator, Origin>>,
}

impl GlobalIndex {
    pub fn exporters(&self, pi: &PredicateIndicator) -> &[Exporter] {
        self.exports.get(&PredicateIndicator::new(pi.name.as_str(), pi.arity)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn import_origin(&self, path: &str, pi: &PredicateIndicator) -> Option<&Origin> {
        self.imported.get(path)?.get(pi)
    }
}

fn bare(pi: &PredicateIndicator) -> PredicateIndicator {
    PredicateIndicator::new(pi.name.as_str(), pi.arity)
}

/// The target file of a project import.
pub(crate) fn import_target<'a>(global: &GlobalIndex, indices: &'a [FileIndex], record: &ImportRecord) -> Option<&'a FileIndex> {
    match &record.resolution {
        Resolution::Project(path) => global.files.get(path).map(|&i| &indices[i]),
        _ => None,
    }
}

pub fn link(indices: &[FileIndex]) -> (GlobalIndex, Vec<Diagnostic>) {
    let catalog = Catalog::bundled();
    let mut global = GlobalIndex::default();
    for (i, idx) in indices.iter().enumerate() {
        global.files.insert(idx.path.clone(), i);
        if let Some(m) = &idx.module {
            global.modules.entry(m.name.clone()).or_insert_with(|| idx.path.clone());
        }
        for pi in idx.export_set() {
            let exporter = Exporter { path: idx.path.clone(), module: idx.module.as_ref().map(|m| m.name.clone()) };
            global.exports.entry(pi).or_default().push(exporter);
        }
    }
    for list in global.exports.values_mut() {
        list.sort();
    }

    let mut diags = Vec::new();
    for idx in indices {
        let mut imported: BTreeMap<PredicateIndicator, Origin> = BTreeMap::new();
        let mut unresolved = false;
        for record in &idx.imports {
            let (origin, available): (Origin, Vec<PredicateIndicator>) = match &record.resolution {
                Resolution::Project(path) => {
                    let target = import_target(&global, indices, record).expect("project import target");
                    (Origin::Project(path.clone()), target.export_set())
                }
                Resolution::Catalog(lib) => (
                    Origin::Library(lib.clone()),
                    catalog.library_exports(lib).iter().map(|e| e.indicator.clone()).collect(),
                ),
                Resolution::External { path, exports, .. } => {
                    (Origin::External(path.to_string_lossy().into_owned()), exports.clone())
                }
                Resolution::Unresolved => {
                    unresolved = true;
                    let severity = match record.target {
                        LoadTarget::Library(_) => Severity::Warning,
                        LoadTarget::File(_) => Severity::Error,
                    };
                    diags.push(Diagnostic::new(
                        severity,
                        codes::UNRESOLVED_IMPORT,
                        format!("cannot resolve import {}", record.target),
                        record.target_span,
                    ));
                    continue;
                }
            };
            let names: Vec<PredicateIndicator> = match &record.names {
                ImportNames::All => available,
                ImportNames::Only(list) => {
                    let mut names = Vec::new();
                    for (pi, span) in list {
                        if available.contains(pi) {
                            names.push(pi.clone());
                        } else {
                            diags.push(Diagnostic::error(
                                codes::NOT_EXPORTED,
                                format!("{} is not exported by {}", pi.label(), record.target),
                                *span,
                            ));
                        }
                    }
                    names
                }
            };
            for pi in names {
                imported.entry(pi).or_insert_with(|| origin.clone());
            }
        }

        for call in &idx.calls {
            let pi = bare(&call.indicator);
            let resolved = match &call.indicator.module {
                Some(m) => match global.modules.get(m) {
                    Some(path) => {
                        let target = &indices[global.files[path]];
                        target.defines(&pi) || target.exports(&pi)
                    }
                    // Modules outside the project are not checked.
                    None => true,
                },
                None => idx.defines(&pi) || catalog.is_builtin(&pi.name, pi.arity) || imported.contains_key(&pi),
            };
            if resolved {
                continue;
            }
            let severity = if unresolved { Severity::Warning } else { Severity::Error };
            let mut d = Diagnostic::new(
                severity,
                codes::UNDEFINED_PREDICATE,
                format!("unknown predicate {}", call.indicator),
                call.span,
            );
            for (other, span) in neighbors(idx, &imported, &global, &pi) {
                d = d.with_related(span.unwrap_or(call.span), format!("did you mean {}", other.label()));
            }
            diags.push(d);
        }
        global.imported.insert(idx.path.clone(), imported);
    }
    (global, diags)
}

/// Same-name predicates with another arity that the caller could mean.
fn neighbors(
    idx: &FileIndex,
    imported: &BTreeMap<PredicateIndicator, Origin>,
    global: &GlobalIndex,
    pi: &PredicateIndicator,
) -> Vec<(PredicateIndicator, Option<crate::span::SourceSpan>)> {
    let mut out: BTreeMap<PredicateIndicator, Option<crate::span::SourceSpan>> = BTreeMap::new();
    let same = |p: &PredicateIndicator| p.name == pi.name && p.arity != pi.arity;
    for (p, def) in idx.defined.iter().filter(|(p, _)| same(p)) {
        out.insert(p.clone(), Some(def.head_spans[0]));
    }
    for p in imported.keys().chain(global.exports.keys()).filter(|p| same(p)) {
        out.entry(p.clone()).or_insert(None);
    }
    for e in Catalog::bundled().iter().filter(|e| e.is_system() && same(&e.indicator)) {
        out.entry(e.indicator.clone()).or_insert(None);
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use crate::diag::codes;
    use crate::workspace::tests::project;

    #[test]
    fn builtins_resolve() {
        let m = project(&[("a.pl", "p(X) :- X = 1, X > 0, atom_length(abc, _).\n")]);
        assert!(m.diagnostics.is_empty(), "{:?}", m.diagnostics);
    }

    #[test]
    fn arity_neighbor_is_suggested() {
        let m = project(&[("a.pl", "f(_, _).\np :- f(1).\n")]);
        let d: Vec<_> = m.diagnostics.iter().filter(|d| d.code == codes::UNDEFINED_PREDICATE).collect();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].related[0].1, "did you mean f/2");
        assert_eq!(d[0].related[0].0.start_line, 1);
    }

    #[test]
    fn not_exported_and_unresolved() {
        let m = project(&[
            ("a.pl", ":- use_module(b, [g/0]).\n:- use_module(c).\n:- use_module(library(nosuch)).\n"),
            ("b.pl", ":- module(b, [f/1]).\nf(_).\ng.\n"),
        ]);
        let got: Vec<_> = m.diagnostics.iter().map(|d| (d.code, d.is_error())).collect();
        assert_eq!(
            got,
            [(codes::NOT_EXPORTED, true), (codes::UNRESOLVED_IMPORT, true), (codes::UNRESOLVED_IMPORT, false)]
        );
    }

    #[test]
    fn library_imports_come_from_the_catalog() {
        let m = project(&[("a.pl", ":- use_module(library(lists)).\np(L) :- member(1, L).\nq :- maplist(p, []).\n")]);
        let got: Vec<_> = m.diagnostics.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(got, ["unknown predicate maplist/2"]);
    }

    #[test]
    fn plain_files_export_everything() {
        let m = project(&[("a.pl", ":- ensure_loaded(util).\np :- helper.\n"), ("util.pl", "helper.\n")]);
        assert!(m.diagnostics.is_empty(), "{:?}", m.diagnostics);
        assert_eq!(m.global.exporters(&crate::PredicateIndicator::new("helper", 0))[0].path, "util.pl");
    }

    #[test]
    fn qualified_calls_check_the_module() {
        let m = project(&[
            ("a.pl", "p :- b:f(1), b:nope, other:x.\n"),
            ("b.pl", ":- module(b, [f/1]).\nf(_).\n"),
        ]);
        let got: Vec<_> = m.diagnostics.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(got, ["unknown predicate b:nope/0"]);
    }
}
