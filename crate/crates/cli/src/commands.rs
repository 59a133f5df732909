use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use pldev_core::database::Database;
use pldev_core::diag::Severity;
use pldev_core::docgen::generate_html;
use pldev_core::engine::{consult, repl, EngineChain, FsLoader};
use pldev_core::workspace::{
    apply_fix, build_project, complete, hover, outline, quick_fixes, Config, HoverMode, OutputFormat, ProjectModel,
};
use pldev_core::FileId;

use crate::{output, Cli, Command, GlobalOpts};

/// Config file settings overridden by command-line flags.
fn config_for(root: &Path, opts: &GlobalOpts) -> Result<Config> {
    let mut config = Config::load(root).with_context(|| format!("reading config in {}", root.display()))?;
    if let Some(f) = &opts.format {
        config.format = OutputFormat::parse(f).ok_or_else(|| anyhow!("unknown format {f}"))?;
    }
    if !opts.libs.is_empty() {
        config.lib_paths = opts.libs.clone();
    }
    if !opts.globs.is_empty() {
        config.globs = opts.globs.clone();
    }
    Ok(config)
}

fn project_root(path: Option<&PathBuf>, opts: &GlobalOpts) -> PathBuf {
    path.or(opts.root.as_ref()).cloned().unwrap_or_else(|| PathBuf::from("."))
}

fn build(root: &Path, opts: &GlobalOpts) -> Result<(ProjectModel, Config)> {
    if !root.is_dir() {
        bail!("{} is not a directory", root.display());
    }
    let config = config_for(root, opts)?;
    let model = build_project(root, &config)?;
    Ok((model, config))
}

/// The project holding `file` and the file's path inside it. The root is
/// `--root`, else the current directory when it contains the file, else
/// the file's own directory.
fn locate(file: &Path, opts: &GlobalOpts) -> Result<(PathBuf, String)> {
    let abs = file.canonicalize().with_context(|| format!("cannot open {}", file.display()))?;
    let candidates: Vec<PathBuf> = match &opts.root {
        Some(r) => vec![r.clone()],
        None => vec![PathBuf::from("."), abs.parent().map(Path::to_path_buf).unwrap_or_default()],
    };
    for root in candidates {
        let Ok(canon) = root.canonicalize() else { continue };
        if let Ok(rel) = abs.strip_prefix(&canon) {
            let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            return Ok((root, rel));
        }
    }
    bail!("{} is not inside the project root", file.display())
}

/// A file-level command's model, with the file guaranteed to be part of it.
fn build_for_file(file: &Path, opts: &GlobalOpts) -> Result<(ProjectModel, Config, String)> {
    let (root, rel) = locate(file, opts)?;
    let (model, config) = build(&root, opts)?;
    if model.file(&rel).is_none() {
        bail!("{rel} does not match the project's source globs");
    }
    Ok((model, config, rel))
}

fn offset(model: &ProjectModel, path: &str, line: u32, col: u32) -> Result<usize> {
    let file = model.file(path).expect("checked by build_for_file");
    file.lines.offset(&file.text, line, col).ok_or_else(|| anyhow!("position {line}:{col} is outside {path}"))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    let opts = &cli.global;
    match &cli.command {
        Command::Check { path } => {
            let (model, config) = build(&project_root(path.as_ref(), opts), opts)?;
            print_diagnostics(out, &model, config.format == OutputFormat::Machine)?;
            Ok(u8::from(model.error_count() > 0))
        }
        Command::Outline { file } => {
            let (model, config, rel) = build_for_file(file, opts)?;
            let items = outline(&model, &rel)?;
            output::outline(out, &rel, &items, config.format == OutputFormat::Machine)?;
            Ok(0)
        }
        Command::Hover { file, line, col, doc } => {
            let (model, config, rel) = build_for_file(file, opts)?;
            let at = offset(&model, &rel, *line, *col)?;
            let mode = if *doc { HoverMode::Doc } else { HoverMode::Definition };
            if let Some(info) = hover(&model, &rel, at, mode)? {
                output::hover(out, &rel, &info, config.format == OutputFormat::Machine)?;
            }
            Ok(0)
        }
        Command::Complete { file, line, col } => {
            let (model, config, rel) = build_for_file(file, opts)?;
            let at = offset(&model, &rel, *line, *col)?;
            let items = complete(&model, &rel, at)?;
            output::completions(out, &items, config.format == OutputFormat::Machine)?;
            Ok(0)
        }
        Command::Fix { path, select, index, apply } => {
            let root = project_root(path.as_ref(), opts);
            fix(out, &root, opts, select, *index, *apply)
        }
        Command::Doc { path, out: dir } => {
            let root = project_root(path.as_ref(), opts);
            let (model, config) = build(&root, opts)?;
            let dir = dir.clone().unwrap_or_else(|| root.join(&config.doc_out));
            let written = generate_html(&model, &dir).with_context(|| format!("writing {}", dir.display()))?;
            for p in written {
                writeln!(out, "{}", p.display())?;
            }
            Ok(0)
        }
        Command::Repl { files } => {
            let stdin = std::io::stdin();
            run_repl(files, opts, &mut stdin.lock(), out)?;
            Ok(0)
        }
    }
}

fn print_diagnostics(out: &mut dyn Write, model: &ProjectModel, machine: bool) -> Result<()> {
    for d in &model.diagnostics {
        let line = if machine { output::diagnostic_record(model, d) } else { output::diagnostic_human(model, d) };
        writeln!(out, "{line}")?;
    }
    if !machine {
        let errors = model.error_count();
        let warnings = model.diagnostics.iter().filter(|d| d.severity == Severity::Warning).count();
        writeln!(out, "{} files, {errors} errors, {warnings} warnings", model.files.len())?;
    }
    Ok(())
}

struct Selector {
    path: String,
    line: u32,
    col: Option<u32>,
}

fn parse_selector(s: &str) -> Result<Selector> {
    let bad = || anyhow!("selector must look like FILE:LINE[:COL], got {s}");
    let mut parts = s.rsplitn(3, ':').collect::<Vec<_>>();
    parts.reverse();
    let num = |t: &str| t.parse::<u32>().ok();
    match parts.as_slice() {
        [path, line, col] if num(line).is_some() && num(col).is_some() => {
            Ok(Selector { path: path.to_string(), line: num(line).unwrap(), col: num(col) })
        }
        [.., path, line] if num(line).is_some() => {
            let prefix = if parts.len() == 3 { format!("{}:", parts[0]) } else { String::new() };
            Ok(Selector { path: format!("{prefix}{path}"), line: num(line).unwrap(), col: None })
        }
        _ => Err(bad()),
    }
}

fn fix(out: &mut dyn Write, root: &Path, opts: &GlobalOpts, select: &str, index: Option<usize>, apply: bool) -> Result<u8> {
    let (model, config) = build(root, opts)?;
    let machine = config.format == OutputFormat::Machine;
    let sel = parse_selector(select)?;
    let path = sel.path.trim_start_matches("./").to_string();
    let matches: Vec<_> = model
        .diagnostics
        .iter()
        .filter(|d| {
            model.path_of(d.span.file) == path
                && d.span.start_line == sel.line
                && sel.col.is_none_or(|c| d.span.start_col == c)
        })
        .collect();
    let diag = match matches.as_slice() {
        [] => bail!("no diagnostic starts at {select}"),
        [d] => *d,
        many => {
            let list: Vec<String> = many.iter().map(|d| output::diagnostic_human(&model, d)).collect();
            bail!("{select} matches {} diagnostics:\n{}", many.len(), list.join("\n"))
        }
    };
    let fixes = quick_fixes(&model, diag);
    let listing = || {
        fixes.iter().enumerate().map(|(i, f)| format!("{}. {}", i + 1, f.title)).collect::<Vec<_>>().join("\n")
    };
    let chosen = match (index, fixes.len()) {
        (_, 0) => bail!("no quick fix for {}", output::diagnostic_human(&model, diag)),
        (None, 1) => &fixes[0],
        (None, _) => bail!("{} fixes are available, choose one with --index:\n{}", fixes.len(), listing()),
        (Some(i), n) if i >= 1 && i <= n => &fixes[i - 1],
        (Some(i), n) => bail!("--index {i} is out of range 1..={n}:\n{}", listing()),
    };

    if !apply {
        if !machine {
            writeln!(out, "{}", chosen.title)?;
        }
        for e in &chosen.edits {
            output::edit(out, &model, e, machine)?;
        }
        return Ok(0);
    }

    let edited = apply_fix(chosen, &model.sources())?;
    for e in &chosen.edits {
        std::fs::write(root.join(&e.path), &edited[&e.path]).with_context(|| format!("writing {}", e.path))?;
    }
    let before = model.error_count();
    let (rebuilt, _) = build(root, opts)?;
    let after = rebuilt.error_count();
    if machine {
        writeln!(out, "applied\t{}\t{before}\t{after}", output::escape(&chosen.title))?;
    } else {
        writeln!(out, "applied: {}\nerrors: {before} -> {after}", chosen.title)?;
    }
    Ok(u8::from(after > 0))
}

fn run_repl(files: &[PathBuf], opts: &GlobalOpts, input: &mut dyn std::io::BufRead, out: &mut dyn Write) -> Result<()> {
    let config = config_for(Path::new("."), opts)?;
    let mut loader = FsLoader::new(config.lib_paths.clone());
    let mut db = Database::new(FileId(0));
    for path in files {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        db.file = loader.register(path.clone());
        let consulted = consult(&text, &mut db, &mut EngineChain::standard(), &mut loader);
        for d in consulted.diagnostics {
            eprintln!("{}:{}:{}: {}: {}", path.display(), d.span.start_line, d.span.start_col, d.severity, d.message);
        }
    }
    db.file = FileId(0);
    repl(&mut db, &mut loader, input, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        let s = parse_selector("a.pl:3").unwrap();
        assert_eq!((s.path.as_str(), s.line, s.col), ("a.pl", 3, None));
        let s = parse_selector("sub/a.pl:3:9").unwrap();
        assert_eq!((s.path.as_str(), s.line, s.col), ("sub/a.pl", 3, Some(9)));
        let s = parse_selector("c:/x.pl:4").unwrap();
        assert_eq!((s.path.as_str(), s.line, s.col), ("c:/x.pl", 4, None));
        assert!(parse_selector("a.pl").is_err());
    }
}
