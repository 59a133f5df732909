use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use super::{consult, EngineChain};
use crate::catalog::Catalog;
use crate::database::{Database, ImportKind, LoadTarget, PredicateIndicator, Resolution};
use crate::ops::OperatorDef;
use crate::span::{FileId, SourceSpan};

pub struct LoadRequest<'a> {
    pub kind: ImportKind,
    pub target: &'a LoadTarget,
    /// The importing file.
    pub from: FileId,
    pub span: SourceSpan,
}

/// What an importer learns about a loaded file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModuleSummary {
    pub module: Option<String>,
    /// A module's export list, or every predicate of a plain file.
    pub exports: Vec<PredicateIndicator>,
    /// Operators that become visible to the importer.
    pub ops: Vec<OperatorDef>,
}

pub enum LoadOutcome {
    Loaded { resolution: Resolution, summary: ModuleSummary },
    NotFound(String),
    /// Resolution is left to a later phase.
    Deferred,
}

pub trait Loader {
    fn load(&mut self, request: &LoadRequest) -> LoadOutcome;
}

/// Defers every load.
#[derive(Debug, Default)]
pub struct NoLoader;

impl Loader for NoLoader {
    fn load(&mut self, _: &LoadRequest) -> LoadOutcome {
        LoadOutcome::Deferred
    }
}

/// The summary an importer sees of a consulted database.
pub fn summarize(db: &Database) -> ModuleSummary {
    match &db.module {
        Some(m) => ModuleSummary {
            module: Some(m.name.clone()),
            exports: m.exports.iter().cloned().collect(),
            ops: m.exported_ops.clone(),
        },
        None => ModuleSummary {
            module: None,
            exports: db.predicates().map(|e| PredicateIndicator::new(e.indicator.name.as_str(), e.indicator.arity)).collect(),
            ops: db.op_decls.iter().filter(|(d, _)| d.priority > 0).map(|(d, _)| d.clone()).collect(),
        },
    }
}

pub(crate) fn file_candidates(base: &Path, name: &str) -> Vec<PathBuf> {
    let p = base.join(name);
    if p.extension().is_some() {
        vec![p]
    } else {
        vec![p.with_extension("pl"), p]
    }
}

/// Loads files from disk, consulting each target once and caching its
/// summary. Library targets are searched in `lib_paths`, then in the
/// bundled catalog.
pub struct FsLoader {
    pub lib_paths: Vec<PathBuf>,
    files: Vec<PathBuf>,
    cache: HashMap<PathBuf, ModuleSummary>,
    in_progress: HashSet<PathBuf>,
}

impl FsLoader {
    pub fn new(lib_paths: Vec<PathBuf>) -> Self {
        FsLoader { lib_paths, files: Vec::new(), cache: HashMap::new(), in_progress: HashSet::new() }
    }

    /// Give a path a file id; relative imports from it resolve against its
    /// directory.
    pub fn register(&mut self, path: impl Into<PathBuf>) -> FileId {
        let path = path.into();
        if let Some(i) = self.files.iter().position(|p| *p == path) {
            return FileId(i as u32 + 1);
        }
        self.files.push(path);
        FileId(self.files.len() as u32)
    }

    pub fn path(&self, file: FileId) -> Option<&Path> {
        (file.0 as usize).checked_sub(1).and_then(|i| self.files.get(i)).map(PathBuf::as_path)
    }

    fn resolve(&self, target: &LoadTarget, from: FileId) -> Option<PathBuf> {
        let candidates: Vec<PathBuf> = match target {
            LoadTarget::File(name) => {
                let base = self.path(from).and_then(Path::parent).unwrap_or(Path::new("."));
                file_candidates(base, name)
            }
            LoadTarget::Library(name) => self.lib_paths.iter().flat_map(|d| file_candidates(d, name)).collect(),
        };
        candidates.into_iter().find(|p| p.is_file())
    }

    fn summary_of(&mut self, path: &Path) -> Result<ModuleSummary, String> {
        let key = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        if let Some(s) = self.cache.get(&key) {
            return Ok(s.clone());
        }
        if !self.in_progress.insert(key.clone()) {
            // A cycle: the partial view is empty.
            return Ok(ModuleSummary::default());
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()));
        let summary = text.map(|text| {
            let mut db = Database::new(self.register(path));
            consult(&text, &mut db, &mut EngineChain::standard(), self);
            summarize(&db)
        });
        self.in_progress.remove(&key);
        if let Ok(s) = &summary {
            self.cache.insert(key, s.clone());
        }
        summary
    }
}

impl Loader for FsLoader {
    fn load(&mut self, request: &LoadRequest) -> LoadOutcome {
        let Some(path) = self.resolve(request.target, request.from) else {
            if let LoadTarget::Library(name) = request.target {
                let catalog = Catalog::bundled();
                if catalog.has_library(name) {
                    let exports = catalog.library_exports(name).iter().map(|e| e.indicator.clone()).collect();
                    let summary = ModuleSummary { module: Some(name.clone()), exports, ops: Vec::new() };
                    return LoadOutcome::Loaded { resolution: Resolution::Catalog(name.clone()), summary };
                }
            }
            return LoadOutcome::NotFound(format!("cannot find {}", request.target));
        };
        match self.summary_of(&path) {
            Ok(summary) => LoadOutcome::Loaded {
                resolution: Resolution::External {
                    path,
                    module: summary.module.clone(),
                    exports: summary.exports.clone(),
                },
                summary,
            },
            Err(message) => LoadOutcome::NotFound(message),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::codes;

    #[test]
    fn imported_operators_become_visible() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("ops.pl"), ":- module(ops, [op(700, xfx, ===), eq/2]).\neq(X, X).\n").unwrap();
        let main = dir.path().join("main.pl");
        std::fs::write(&main, ":- use_module(ops).\nt :- a === b.\n").unwrap();
        let mut loader = FsLoader::new(Vec::new());
        let mut db = Database::new(loader.register(&main));
        let c = consult(&std::fs::read_to_string(&main).unwrap(), &mut db, &mut EngineChain::standard(), &mut loader);
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        match &db.imports[0].resolution {
            Resolution::External { module, exports, .. } => {
                assert_eq!(module.as_deref(), Some("ops"));
                assert_eq!(exports[0].label(), "eq/2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_files_and_libraries() {
        let mut loader = FsLoader::new(Vec::new());
        let mut db = Database::default();
        let src = ":- use_module(nowhere).\n:- use_module(library(nowhere)).\n:- use_module(library(lists)).\n";
        let c = consult(src, &mut db, &mut EngineChain::standard(), &mut loader);
        let got: Vec<_> = c.diagnostics.iter().map(|d| (d.code, d.is_error())).collect();
        assert_eq!(got, [(codes::FILE_NOT_FOUND, true), (codes::FILE_NOT_FOUND, false)]);
        assert_eq!(db.imports[2].resolution, Resolution::Catalog("lists".into()));
    }

    #[test]
    fn import_cycles_terminate() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.pl"), ":- module(a, [f/0]).\n:- use_module(b).\nf.\n").unwrap();
        std::fs::write(dir.path().join("b.pl"), ":- module(b, [g/0]).\n:- use_module(a).\ng.\n").unwrap();
        let mut loader = FsLoader::new(Vec::new());
        let path = dir.path().join("a.pl");
        let mut db = Database::new(loader.register(&path));
        let c = consult(&std::fs::read_to_string(&path).unwrap(), &mut db, &mut EngineChain::standard(), &mut loader);
        assert!(c.diagnostics.is_empty());
    }
}
