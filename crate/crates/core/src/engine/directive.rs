use std::collections::BTreeSet;

use super::loader::{LoadOutcome, LoadRequest, Loader};
use crate::database::{
    Database, ImportKind, ImportNames, ImportRecord, LoadTarget, ModuleInfo, PredProperty, PredicateIndicator,
    Resolution,
};
use crate::diag::{codes, Diagnostic};
use crate::ops::{Fixity, OperatorDef};
use crate::span::SourceSpan;
use crate::term::{Term, TermKind};

type Diags = Vec<Diagnostic>;

/// Execute the goal of a `:- Goal` sentence against `db`.
pub fn exec_directive(goal: &Term, db: &mut Database, loader: &mut dyn Loader) -> Diags {
    exec(goal, goal.span, db, loader)
}

/// `sentence_span` is recorded on the imports the directive creates.
pub(super) fn exec(goal: &Term, sentence_span: SourceSpan, db: &mut Database, loader: &mut dyn Loader) -> Diags {
    let mut out = Vec::new();
    for g in goal.conjuncts() {
        out.extend(exec_one(g, sentence_span, db, loader));
    }
    out
}

fn bad(t: &Term, message: impl Into<String>) -> Diags {
    vec![Diagnostic::error(codes::DIRECTIVE_ERROR, message, t.span)]
}

fn exec_one(goal: &Term, sentence_span: SourceSpan, db: &mut Database, loader: &mut dyn Loader) -> Diags {
    let Some((name, arity)) = goal.name_arity() else {
        return bad(goal, "directive is not callable");
    };
    let args = goal.args();
    match (name, arity) {
        ("op", 3) => op(args, goal.span, db),
        ("module", 2) => module(args, db),
        ("use_module", 1 | 2) => {
            let names = match args.get(1) {
                None => Ok(ImportNames::All),
                Some(list) => import_list(list),
            };
            match names {
                Ok(names) => import(ImportKind::UseModule, &args[0], names, sentence_span, db, loader),
                Err(d) => d,
            }
        }
        ("ensure_loaded", 1) => import(ImportKind::EnsureLoaded, &args[0], ImportNames::All, sentence_span, db, loader),
        ("include", 1) => import(ImportKind::Include, &args[0], ImportNames::All, sentence_span, db, loader),
        ("consult", 1) => {
            let files: Vec<&Term> = args[0].list_items().unwrap_or_else(|| vec![&args[0]]);
            files
                .into_iter()
                .flat_map(|f| import(ImportKind::Consult, f, ImportNames::All, sentence_span, db, loader))
                .collect()
        }
        (".", 2) | ("[]", 0) => match goal.list_items() {
            Some(files) => files
                .into_iter()
                .flat_map(|f| import(ImportKind::Consult, f, ImportNames::All, sentence_span, db, loader))
                .collect(),
            None => bad(goal, "consult list must be a proper list"),
        },
        ("dynamic", 1) => declare(&args[0], Some(PredProperty::Dynamic), db),
        ("discontiguous", 1) => declare(&args[0], Some(PredProperty::Discontiguous), db),
        ("multifile" | "public", 1) => declare(&args[0], None, db),
        ("set_prolog_flag", 2) => set_flag(args, db),
        ("initialization", 1 | 2) | ("meta_predicate" | "mode", 1) => Vec::new(),
        _ => vec![Diagnostic::warning(
            codes::UNKNOWN_DIRECTIVE,
            format!("unknown directive {}/{arity}", crate::printer::quote_atom(name)),
            goal.functor_span,
        )],
    }
}

fn op(args: &[Term], span: SourceSpan, db: &mut Database) -> Diags {
    let defs = match op_defs(args) {
        Ok(d) => d,
        Err(d) => return d,
    };
    let mut out = Vec::new();
    for def in defs {
        match db.add_operator(def.clone()) {
            Ok(()) => db.op_decls.push((def, span)),
            Err(e) => out.push(Diagnostic::error(codes::DIRECTIVE_ERROR, e.to_string(), span)),
        }
    }
    out
}

/// The definitions named by the arguments of `op/3`.
fn op_defs(args: &[Term]) -> Result<Vec<OperatorDef>, Diags> {
    let priority = match args[0].kind {
        TermKind::Int(p) if (0..=1200).contains(&p) => p as u16,
        _ => return Err(bad(&args[0], "operator priority must be an integer in 0..1200")),
    };
    let fixity = args[1].as_atom().and_then(Fixity::parse).ok_or_else(|| bad(&args[1], "unknown operator type"))?;
    let names = args[2].list_items().unwrap_or_else(|| vec![&args[2]]);
    names
        .into_iter()
        .map(|n| match n.as_atom() {
            Some(a) => Ok(OperatorDef::new(priority, fixity, a)),
            None => Err(bad(n, "operator name must be an atom")),
        })
        .collect()
}

fn module(args: &[Term], db: &mut Database) -> Diags {
    let Some(name) = args[0].as_atom() else {
        return bad(&args[0], "module name must be an atom");
    };
    let Some(items) = args[1].list_items() else {
        return bad(&args[1], "export list must be a proper list");
    };
    let mut out = Vec::new();
    let mut exports = BTreeSet::new();
    let mut exported_ops = Vec::new();
    for item in items {
        if let Some(op_args) = item.match_functor("op", 3) {
            match op_defs(op_args) {
                Ok(defs) => {
                    for def in defs {
                        match db.add_operator(def.clone()) {
                            Ok(()) => {
                                db.op_decls.push((def.clone(), item.span));
                                exported_ops.push(def);
                            }
                            Err(e) => out.push(Diagnostic::error(codes::DIRECTIVE_ERROR, e.to_string(), item.span)),
                        }
                    }
                }
                Err(d) => out.extend(d),
            }
            continue;
        }
        match parse_indicator(item) {
            Some((name, arity, _)) => {
                exports.insert(PredicateIndicator::new(name, arity));
            }
            None => out.extend(bad(item, "expected name/arity, name//arity or op/3 in export list")),
        }
    }
    let imports = db.imports.clone();
    db.module = Some(ModuleInfo { name: name.to_string(), exports, exported_ops, imports, defining_file: db.file });
    out
}

/// `name/arity` or `name//arity` (translated arity, flagged), optionally
/// module-qualified.
pub fn parse_indicator(t: &Term) -> Option<(String, usize, bool)> {
    if let Some(args) = t.match_functor(":", 2) {
        return parse_indicator(&args[1]);
    }
    let (args, dcg) = match (t.match_functor("/", 2), t.match_functor("//", 2)) {
        (Some(a), _) => (a, false),
        (_, Some(a)) => (a, true),
        _ => return None,
    };
    let name = args[0].as_atom()?;
    let arity = match args[1].kind {
        TermKind::Int(n) if n >= 0 => n as usize,
        _ => return None,
    };
    Some((name.to_string(), if dcg { arity + 2 } else { arity }, dcg))
}

fn import_list(list: &Term) -> Result<ImportNames, Diags> {
    if list.match_functor("except", 1).is_some() {
        return Ok(ImportNames::All);
    }
    let items = list.list_items().ok_or_else(|| bad(list, "import list must be a proper list"))?;
    let mut names = Vec::new();
    for item in items {
        let target = item.match_functor("as", 2).map(|a| &a[0]).unwrap_or(item);
        match parse_indicator(target) {
            Some((n, a, _)) => names.push((PredicateIndicator::new(n, a), target.span)),
            None => return Err(bad(item, "expected name/arity in import list")),
        }
    }
    Ok(ImportNames::Only(names))
}

pub(crate) fn load_target(t: &Term) -> Option<LoadTarget> {
    match &t.kind {
        TermKind::Atom(a) => Some(LoadTarget::File(a.clone())),
        TermKind::Str(s) => Some(LoadTarget::File(s.clone())),
        _ => {
            let inner = t.match_functor("library", 1)?;
            Some(LoadTarget::Library(path_text(&inner[0])?))
        }
    }
}

/// `a/b/c` as a path.
fn path_text(t: &Term) -> Option<String> {
    if let Some(a) = t.as_atom() {
        return Some(a.to_string());
    }
    let parts = t.match_functor("/", 2)?;
    Some(format!("{}/{}", path_text(&parts[0])?, path_text(&parts[1])?))
}

fn import(
    kind: ImportKind,
    target_term: &Term,
    names: ImportNames,
    sentence_span: SourceSpan,
    db: &mut Database,
    loader: &mut dyn Loader,
) -> Diags {
    let Some(target) = load_target(target_term) else {
        return bad(target_term, "expected a file name or library(Name)");
    };
    let key = target.to_string();
    if kind == ImportKind::EnsureLoaded && db.loaded.contains(&key) {
        return Vec::new();
    }
    let request = LoadRequest { kind, target: &target, from: db.file, span: target_term.span };
    let mut out = Vec::new();
    let resolution = match loader.load(&request) {
        LoadOutcome::Loaded { resolution, summary } => {
            for def in summary.ops {
                // An imported operator that clashes with a local one is
                // ignored rather than reported against the importer.
                let _ = db.add_operator(def);
            }
            db.loaded.insert(key);
            resolution
        }
        LoadOutcome::NotFound(message) => {
            let d = match target {
                LoadTarget::Library(_) => Diagnostic::warning(codes::FILE_NOT_FOUND, message, target_term.span),
                LoadTarget::File(_) => Diagnostic::error(codes::FILE_NOT_FOUND, message, target_term.span),
            };
            out.push(d);
            Resolution::Unresolved
        }
        LoadOutcome::Deferred => Resolution::Unresolved,
    };
    let record = ImportRecord { kind, target, target_span: target_term.span, names, resolution, span: sentence_span };
    if let Some(m) = &mut db.module {
        m.imports.push(record.clone());
    }
    db.imports.push(record);
    out
}

/// Items of a declaration argument: `a/1, b/2`, `[a/1, b/2]` or `a/1`.
fn declaration_items(t: &Term) -> Vec<&Term> {
    if let Some(items) = t.list_items() {
        return items.into_iter().flat_map(declaration_items).collect();
    }
    if let Some(args) = t.match_functor(",", 2) {
        let mut out = declaration_items(&args[0]);
        out.extend(declaration_items(&args[1]));
        return out;
    }
    vec![t]
}

fn declare(arg: &Term, property: Option<PredProperty>, db: &mut Database) -> Diags {
    let mut out = Vec::new();
    for item in declaration_items(arg) {
        match parse_indicator(item) {
            Some((name, arity, _)) => {
                if let Some(p) = property {
                    db.declare(&name, arity, p);
                }
            }
            None => out.extend(bad(item, "expected name/arity")),
        }
    }
    out
}

fn set_flag(args: &[Term], db: &mut Database) -> Diags {
    let Some(flag) = args[0].as_atom() else {
        return bad(&args[0], "flag name must be an atom");
    };
    let value = match &args[1].kind {
        TermKind::Atom(a) => a.clone(),
        TermKind::Int(i) => i.to_string(),
        _ => return bad(&args[1], "flag value must be atomic"),
    };
    if flag == "double_quotes" && !matches!(value.as_str(), "codes" | "chars" | "atom" | "string") {
        return bad(&args[1], "double_quotes must be one of codes, chars, atom, string");
    }
    db.flags.insert(flag.to_string(), value);
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Severity;
    use crate::engine::NoLoader;
    use crate::reader::parse_term_text;

    fn run(db: &mut Database, src: &str) -> Diags {
        let goal = parse_term_text(src, db).unwrap();
        exec_directive(&goal, db, &mut NoLoader)
    }

    #[test]
    fn module_sets_name_and_exports() {
        let mut db = Database::default();
        assert!(run(&mut db, "module(m, [f/1, s//0, op(700, xfx, ===)])").is_empty());
        let m = db.module.as_ref().unwrap();
        assert_eq!(m.name, "m");
        let exports: Vec<String> = m.exports.iter().map(|p| p.label()).collect();
        assert_eq!(exports, ["f/1", "s/2"]);
        assert!(db.ops.infix("===").is_some());
        assert_eq!(m.exported_ops.len(), 1);
    }

    #[test]
    fn dynamic_accepts_comma_lists_and_lists() {
        let mut db = Database::default();
        assert!(run(&mut db, "dynamic((p/1, q/2))").is_empty());
        assert!(run(&mut db, "dynamic [r/0]").is_empty());
        for (n, a) in [("p", 1), ("q", 2), ("r", 0)] {
            let e = db.lookup(&PredicateIndicator::new(n, a)).unwrap();
            assert!(e.properties.contains(&PredProperty::Dynamic));
        }
        let d = run(&mut db, "dynamic p/x");
        assert_eq!(d[0].code, codes::DIRECTIVE_ERROR);
    }

    #[test]
    fn op_list_and_errors() {
        let mut db = Database::default();
        assert!(run(&mut db, "op(200, xfy, [^^, ++])").is_empty());
        assert_eq!(db.op_decls.len(), 2);
        assert_eq!(run(&mut db, "op(1201, xfx, foo)")[0].code, codes::DIRECTIVE_ERROR);
        assert_eq!(run(&mut db, "op(100, zzz, foo)")[0].code, codes::DIRECTIVE_ERROR);
        assert_eq!(run(&mut db, "op(100, xf, ++)")[0].code, codes::DIRECTIVE_ERROR);
    }

    #[test]
    fn unknown_directive_warns() {
        let mut db = Database::default();
        let d = run(&mut db, "frobnicate(1)");
        assert_eq!(d[0].code, codes::UNKNOWN_DIRECTIVE);
        assert_eq!(d[0].severity, Severity::Warning);
        assert!(run(&mut db, "initialization(main)").is_empty());
    }

    #[test]
    fn imports_are_recorded() {
        let mut db = Database::default();
        assert!(run(&mut db, "use_module(library(lists), [append/3])").is_empty());
        assert!(run(&mut db, "ensure_loaded(b)").is_empty());
        assert!(run(&mut db, "[c, d]").is_empty());
        let kinds: Vec<_> = db.imports.iter().map(|i| (i.kind, i.target.to_string())).collect();
        assert_eq!(
            kinds,
            [
                (ImportKind::UseModule, "library(lists)".to_string()),
                (ImportKind::EnsureLoaded, "b".to_string()),
                (ImportKind::Consult, "c".to_string()),
                (ImportKind::Consult, "d".to_string()),
            ]
        );
        assert!(matches!(&db.imports[0].names, ImportNames::Only(v) if v[0].0.label() == "append/3"));
    }

    #[test]
    fn double_quotes_flag_is_honored() {
        let mut db = Database::default();
        assert!(run(&mut db, "set_prolog_flag(double_quotes, codes)").is_empty());
        assert_eq!(parse_term_text("\"a\"", &db).unwrap().shape().to_string(), "'.'(97,[])");
        assert_eq!(run(&mut db, "set_prolog_flag(double_quotes, nope)")[0].code, codes::DIRECTIVE_ERROR);
    }
}
