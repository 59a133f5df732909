//! Project-level analysis: per-file indexing, cross-file linking and the
//! editor queries answered from the resulting [`ProjectModel`].

mod config;
mod fix;
mod index;
mod link;
mod loader;
mod query;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::database::Database;
use crate::diag::{codes, Diagnostic};
use crate::engine::{consult, EngineChain};
use crate::lexer::Token;
use crate::reader::Sentence;
use crate::span::{FileId, LineIndex, SourceSpan};

pub use config::{Config, ConfigError, OutputFormat, CONFIG_FILE};
pub use fix::{apply_fix, quick_fixes, FixError, QuickFix, TextEdit};
pub use index::{index_file, CallSite, Definition, FileIndex};
pub use link::{link, Exporter, GlobalIndex};
pub use query::{complete, hover, outline, CompletionItem, CompletionKind, HoverInfo, HoverMode, OutlineItem, OutlineKind, QueryError};

#[derive(Clone, Debug)]
pub struct SourceFile {
    pub id: FileId,
    /// Relative to the project root, `/`-separated.
    pub path: String,
    pub text: String,
    pub lines: LineIndex,
    pub tokens: Vec<Token>,
    pub sentences: Vec<Sentence>,
    pub db: Database,
}

impl SourceFile {
    pub fn span(&self, start: usize, end: usize) -> SourceSpan {
        self.lines.span(&self.text, self.id, start, end)
    }
}

/// The analyzed project. Immutable once built.
#[derive(Clone, Debug)]
pub struct ProjectModel {
    pub root: Option<PathBuf>,
    pub config: Config,
    /// Sorted by path; `files[i].id == FileId(i + 1)`.
    pub files: Vec<SourceFile>,
    pub indices: Vec<FileIndex>,
    pub global: GlobalIndex,
    /// All diagnostics, sorted by file, position, severity and code.
    pub diagnostics: Vec<Diagnostic>,
}

impl ProjectModel {
    pub fn file(&self, path: &str) -> Option<&SourceFile> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn file_by_id(&self, id: FileId) -> Option<&SourceFile> {
        (id.0 as usize).checked_sub(1).and_then(|i| self.files.get(i))
    }

    pub fn index(&self, path: &str) -> Option<&FileIndex> {
        self.indices.iter().find(|i| i.path == path)
    }

    pub fn path_of(&self, id: FileId) -> &str {
        self.file_by_id(id).map(|f| f.path.as_str()).unwrap_or("")
    }

    pub fn diagnostics_for(&self, path: &str) -> impl Iterator<Item = &Diagnostic> {
        let id = self.file(path).map(|f| f.id);
        self.diagnostics.iter().filter(move |d| Some(d.span.file) == id)
    }

    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    /// Current text of every file, keyed by path.
    pub fn sources(&self) -> BTreeMap<String, String> {
        self.files.iter().map(|f| (f.path.clone(), f.text.clone())).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("invalid glob pattern {pattern}: {message}")]
    Glob { pattern: String, message: String },
    #[error("cannot walk {path}: {message}")]
    Walk { path: PathBuf, message: String },
}

/// Paths under `root` matching the configured globs, relative and sorted.
pub fn discover(root: &Path, config: &Config) -> Result<Vec<String>, BuildError> {
    if !root.is_dir() {
        return Err(BuildError::NotADirectory(root.to_path_buf()));
    }
    let mut builder = globset::GlobSetBuilder::new();
    for pattern in &config.globs {
        let glob = globset::Glob::new(pattern)
            .map_err(|e| BuildError::Glob { pattern: pattern.clone(), message: e.to_string() })?;
        builder.add(glob);
    }
    let set = builder.build().map_err(|e| BuildError::Glob { pattern: config.globs.join(","), message: e.to_string() })?;
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| BuildError::Walk { path: root.to_path_buf(), message: e.to_string() })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(root) else { continue };
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if set.is_match(&rel) {
            out.push(rel);
        }
    }
    out.sort();
    Ok(out)
}

/// Build the model of every matching file under `root`.
pub fn build_project(root: &Path, config: &Config) -> Result<ProjectModel, BuildError> {
    let paths = discover(root, config)?;
    Ok(build_files(root, paths, config))
}

/// Build from an explicit list of root-relative paths, in any order.
pub fn build_files(root: &Path, paths: Vec<String>, config: &Config) -> ProjectModel {
    let mut sources = BTreeMap::new();
    let mut unreadable = Vec::new();
    for p in paths {
        match std::fs::read(root.join(&p)).map(String::from_utf8) {
            Ok(Ok(text)) => {
                sources.insert(p, text);
            }
            Ok(Err(_)) => unreadable.push((p, "file is not valid UTF-8".to_string())),
            Err(e) => unreadable.push((p, e.to_string())),
        }
    }
    let mut model = build(Some(root), sources, &unreadable, config);
    model.root = Some(root.to_path_buf());
    model
}

/// Build from in-memory sources keyed by relative path.
pub fn build_from_sources(sources: BTreeMap<String, String>, config: &Config) -> ProjectModel {
    build(None, sources, &[], config)
}

fn build(
    root: Option<&Path>,
    mut sources: BTreeMap<String, String>,
    unreadable: &[(String, String)],
    config: &Config,
) -> ProjectModel {
    for (p, _) in unreadable {
        sources.insert(p.clone(), String::new());
    }
    let ids: BTreeMap<String, FileId> =
        sources.keys().enumerate().map(|(i, p)| (p.clone(), FileId(i as u32 + 1))).collect();
    let mut loader = loader::ProjectLoader::new(root, &sources, &ids, config);
    let mut files = Vec::new();
    let mut diagnostics = Vec::new();

    // Phase I: read every file with its own database.
    for (path, text) in &sources {
        let id = ids[path];
        let mut db = Database::new(id);
        let consulted = consult(text, &mut db, &mut EngineChain::standard(), &mut loader);
        diagnostics.extend(consulted.diagnostics);
        let lines = LineIndex::new(text);
        if let Some((_, message)) = unreadable.iter().find(|(p, _)| p == path) {
            let span = lines.span(text, id, 0, 0);
            diagnostics.push(Diagnostic::error(codes::READ_ERROR, format!("cannot read {path}: {message}"), span));
        }
        files.push(SourceFile {
            id,
            path: path.clone(),
            text: text.clone(),
            lines,
            tokens: consulted.tokens,
            sentences: consulted.sentences,
            db,
        });
    }

    // Phase II: per-file index.
    let indices: Vec<FileIndex> = files.iter().map(|f| index_file(&f.path, &f.sentences, &f.db)).collect();
    for idx in &indices {
        diagnostics.extend(idx.diagnostics.iter().cloned());
    }

    // Phase III: link.
    let (global, link_diags) = link(&indices);
    diagnostics.extend(link_diags);

    // Phase IV: a stable order for presentation.
    sort_diagnostics(&mut diagnostics);
    ProjectModel { root: None, config: config.clone(), files, indices, global, diagnostics }
}

pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.span.file, a.span.start, a.span.end, a.severity, a.code, &a.message).cmp(&(
            b.span.file,
            b.span.start,
            b.span.end,
            b.severity,
            b.code,
            &b.message,
        ))
    });
}

/// Resolve `.` and `..` in a `/`-separated relative path.
pub(crate) fn normalize(path: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    for part in path.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                if matches!(parts.last(), None | Some(&"..")) {
                    parts.push("..");
                } else {
                    parts.pop();
                }
            }
            p => parts.push(p),
        }
    }
    parts.join("/")
}

/// Directory part of a relative path (`""` at the root).
pub(crate) fn dir_of(path: &str) -> &str {
    path.rfind('/').map(|i| &path[..i]).unwrap_or("")
}
