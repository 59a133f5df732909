use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use super::{dir_of, normalize, Config};
use crate::database::{Database, LoadTarget, Resolution};
use crate::engine::{consult, summarize, EngineChain, FsLoader, LoadOutcome, LoadRequest, Loader, ModuleSummary};
use crate::span::FileId;

/// Resolves imports against the project's own files first, then the file
/// system and library paths. Anything it cannot find is deferred so that
/// linking reports it.
pub(super) struct ProjectLoader<'a> {
    root: Option<&'a Path>,
    sources: &'a BTreeMap<String, String>,
    ids: &'a BTreeMap<String, FileId>,
    paths: HashMap<FileId, &'a str>,
    fs: FsLoader,
    cache: HashMap<String, ModuleSummary>,
    in_progress: HashSet<String>,
}

impl<'a> ProjectLoader<'a> {
    pub(super) fn new(
        root: Option<&'a Path>,
        sources: &'a BTreeMap<String, String>,
        ids: &'a BTreeMap<String, FileId>,
        config: &Config,
    ) -> Self {
        ProjectLoader {
            root,
            sources,
            ids,
            paths: ids.iter().map(|(p, id)| (*id, p.as_str())).collect(),
            fs: FsLoader::new(config.lib_paths.clone()),
            cache: HashMap::new(),
            in_progress: HashSet::new(),
        }
    }

    /// The project file a relative import names, if any.
    pub(super) fn project_target(sources: &BTreeMap<String, String>, from: &str, name: &str) -> Option<String> {
        let joined = normalize(&format!("{}/{name}", dir_of(from)));
        let has_ext = Path::new(name).extension().is_some();
        let candidates = if has_ext { vec![joined] } else { vec![format!("{joined}.pl"), joined] };
        candidates.into_iter().find(|c| sources.contains_key(c))
    }

    fn summary(&mut self, path: &str) -> ModuleSummary {
        if let Some(s) = self.cache.get(path) {
            return s.clone();
        }
        if !self.in_progress.insert(path.to_string()) {
            return ModuleSummary::default();
        }
        let text: &'a str = &self.sources[path];
        let mut db = Database::new(self.ids[path]);
        consult(text, &mut db, &mut EngineChain::standard(), self);
        let summary = summarize(&db);
        self.in_progress.remove(path);
        self.cache.insert(path.to_string(), summary.clone());
        summary
    }

    fn load_from_fs(&mut self, request: &LoadRequest, target: LoadTarget) -> LoadOutcome {
        let req = LoadRequest { kind: request.kind, target: &target, from: FileId(0), span: request.span };
        match self.fs.load(&req) {
            LoadOutcome::NotFound(_) => LoadOutcome::Deferred,
            other => other,
        }
    }
}

impl Loader for ProjectLoader<'_> {
    fn load(&mut self, request: &LoadRequest) -> LoadOutcome {
        match request.target {
            LoadTarget::File(name) => {
                let from = self.paths.get(&request.from).copied().unwrap_or("");
                if let Some(path) = Self::project_target(self.sources, from, name) {
                    let summary = self.summary(&path);
                    return LoadOutcome::Loaded { resolution: Resolution::Project(path), summary };
                }
                match self.root {
                    Some(root) => {
                        let abs = root.join(dir_of(from)).join(name);
                        self.load_from_fs(request, LoadTarget::File(abs.to_string_lossy().into_owned()))
                    }
                    None => LoadOutcome::Deferred,
                }
            }
            LoadTarget::Library(_) => self.load_from_fs(request, request.target.clone()),
        }
    }
}
