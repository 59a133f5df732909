use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::database::{Database, ImportRecord, ModuleInfo, PredProperty, PredicateIndicator};
use crate::diag::{codes, Diagnostic};
use crate::docgen::{extract_docs, DocBlock, DocTarget};
use crate::ops::OperatorDef;
use crate::reader::{Sentence, SentenceKind};
use crate::span::{FileId, SourceSpan};
use crate::term::{Term, TermKind};

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    /// Grammar rules use the translated arity.
    pub indicator: PredicateIndicator,
    pub dcg: bool,
    /// Whole sentences, in source order.
    pub clause_spans: Vec<SourceSpan>,
    pub head_spans: Vec<SourceSpan>,
    pub first_sentence: usize,
}

impl Definition {
    /// `name/arity`, or `name//arity` with the source arity for grammar
    /// rules.
    pub fn label(&self) -> String {
        let name = crate::printer::quote_atom(&self.indicator.name);
        if self.dcg {
            format!("{name}//{}", self.indicator.arity - 2)
        } else {
            format!("{name}/{}", self.indicator.arity)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CallSite {
    /// `module` is set for explicitly qualified calls (`m:g(X)`).
    pub indicator: PredicateIndicator,
    pub span: SourceSpan,
    pub functor_span: SourceSpan,
    pub sentence: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FileIndex {
    pub file: FileId,
    pub path: String,
    pub module: Option<ModuleInfo>,
    /// The `module/2` directive sentence.
    pub module_span: Option<SourceSpan>,
    /// The export list term of `module/2`.
    pub export_list_span: Option<SourceSpan>,
    pub defined: BTreeMap<PredicateIndicator, Definition>,
    /// Declared (e.g. dynamic) without clauses in this file.
    pub declared: BTreeSet<PredicateIndicator>,
    pub calls: Vec<CallSite>,
    pub imports: Vec<ImportRecord>,
    pub operators_declared: Vec<(OperatorDef, SourceSpan)>,
    pub docs: Vec<DocBlock>,
    /// Per-file findings: singleton variables, discontiguous clauses and
    /// misplaced documentation.
    pub diagnostics: Vec<Diagnostic>,
}

impl FileIndex {
    pub fn exports(&self, pi: &PredicateIndicator) -> bool {
        match &self.module {
            Some(m) => m.exports.contains(pi),
            None => self.defined.contains_key(pi),
        }
    }

    /// What importers see: the export list of a module, or every predicate
    /// of a plain file.
    pub fn export_set(&self) -> Vec<PredicateIndicator> {
        match &self.module {
            Some(m) => m.exports.iter().cloned().collect(),
            None => self.defined.keys().cloned().collect(),
        }
    }

    pub fn defines(&self, pi: &PredicateIndicator) -> bool {
        self.defined.contains_key(pi) || self.declared.contains(pi)
    }

    pub fn doc(&self, target: &DocTarget) -> Option<&DocBlock> {
        self.docs.iter().find(|d| &d.target == target)
    }
}

fn pi(name: &str, arity: usize) -> PredicateIndicator {
    PredicateIndicator::new(name, arity)
}

pub fn index_file(path: &str, sentences: &[Sentence], db: &Database) -> FileIndex {
    let mut index = FileIndex {
        file: db.file,
        path: path.to_string(),
        module: db.module.clone(),
        module_span: None,
        export_list_span: None,
        defined: BTreeMap::new(),
        declared: BTreeSet::new(),
        calls: Vec::new(),
        imports: db.imports.clone(),
        operators_declared: db.op_decls.clone(),
        docs: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut last_defined: Option<PredicateIndicator> = None;
    let mut closed: BTreeSet<PredicateIndicator> = BTreeSet::new();
    let mut reported: BTreeSet<PredicateIndicator> = BTreeSet::new();

    for (i, s) in sentences.iter().enumerate() {
        let mut calls = Calls { out: &mut index.calls, sentence: i };
        match s.kind {
            SentenceKind::Directive => {
                let goal = s.goal().expect("directive goal");
                for g in goal.conjuncts() {
                    if let Some(args) = g.match_functor("module", 2) {
                        if index.module_span.is_none() {
                            index.module_span = Some(s.span);
                            index.export_list_span = Some(args[1].span);
                        }
                    }
                    if let Some(args) = g.match_functor("initialization", 1).or_else(|| g.match_functor("initialization", 2)) {
                        calls.goal(&args[0]);
                    }
                }
            }
            _ => {
                let head = s.head().expect("clause head");
                let Some((name, arity)) = s.defines() else { continue };
                let key = pi(&name, arity);
                let dcg = s.kind == SentenceKind::DcgRule;
                let def = index.defined.entry(key.clone()).or_insert_with(|| Definition {
                    indicator: key.clone(),
                    dcg,
                    clause_spans: Vec::new(),
                    head_spans: Vec::new(),
                    first_sentence: i,
                });
                def.clause_spans.push(s.span);
                def.head_spans.push(head.functor_span);

                if last_defined.as_ref() != Some(&key) {
                    if let Some(prev) = last_defined.take() {
                        closed.insert(prev);
                    }
                    let allowed = db
                        .lookup(&key)
                        .is_some_and(|e| e.properties.contains(&PredProperty::Discontiguous));
                    if closed.contains(&key) && !allowed && reported.insert(key.clone()) {
                        let first = index.defined[&key].clause_spans[0];
                        index.diagnostics.push(
                            Diagnostic::warning(
                                codes::DISCONTIGUOUS_CLAUSES,
                                format!("clauses of {} are not together in the source file", index.defined[&key].label()),
                                head.functor_span,
                            )
                            .with_related(first, "first clause"),
                        );
                    }
                    last_defined = Some(key.clone());
                }

                if let Some(body) = s.body() {
                    if dcg {
                        calls.dcg_body(body);
                    } else {
                        calls.goal(body);
                    }
                }
                index.diagnostics.extend(singletons(&s.term, &index.defined[&key].label()));
            }
        }
    }
    for entry in db.predicates() {
        let key = pi(&entry.indicator.name, entry.indicator.arity);
        if !index.defined.contains_key(&key) {
            index.declared.insert(key);
        }
    }
    let (docs, doc_diags) = extract_docs(sentences);
    index.docs = docs;
    index.diagnostics.extend(doc_diags);
    index
}

fn singletons(term: &Term, label: &str) -> Vec<Diagnostic> {
    let mut seen: HashMap<&str, (usize, SourceSpan)> = HashMap::new();
    let mut order = Vec::new();
    term.walk(&mut |t| {
        if let TermKind::Var { name, .. } = &t.kind {
            if name.starts_with('_') {
                return;
            }
            let e = seen.entry(name.as_str()).or_insert_with(|| {
                order.push(name.as_str());
                (0, t.span)
            });
            e.0 += 1;
        }
    });
    order
        .into_iter()
        .filter(|n| seen[n].0 == 1)
        .map(|n| Diagnostic::warning(codes::SINGLETON_VARIABLE, format!("singleton variable {n} in {label}"), seen[n].1))
        .collect()
}

struct Calls<'a> {
    out: &'a mut Vec<CallSite>,
    sentence: usize,
}

impl Calls<'_> {
    fn record(&mut self, indicator: PredicateIndicator, t: &Term) {
        self.out.push(CallSite { indicator, span: t.span, functor_span: t.functor_span, sentence: self.sentence });
    }

    /// A goal position inside a clause body.
    fn goal(&mut self, t: &Term) {
        let Some((name, arity)) = t.name_arity() else { return };
        let args = t.args();
        if matches!(t.kind, TermKind::List { .. }) {
            return;
        }
        match (name, arity) {
            ("," | ";" | "->" | "*->", 2) => {
                self.goal(&args[0]);
                self.goal(&args[1]);
                return;
            }
            (":", 2) => {
                if let (Some(m), Some((n, a))) = (args[0].as_atom(), args[1].name_arity()) {
                    let mut qualified = pi(n, a);
                    qualified.module = Some(m.to_string());
                    self.record(qualified, &args[1]);
                }
                return;
            }
            _ => {}
        }
        self.record(pi(name, arity), t);
        match (name, arity) {
            ("call", n) if n >= 1 => self.closure(&args[0], n - 1),
            ("\\+" | "not" | "once" | "ignore", 1) => self.goal(&args[0]),
            ("forall", 2) => {
                self.goal(&args[0]);
                self.goal(&args[1]);
            }
            ("catch", 3) => {
                self.goal(&args[0]);
                self.goal(&args[2]);
            }
            ("findall", 3 | 4) | ("aggregate_all", 3) => self.goal(&args[1]),
            ("bagof" | "setof", 3) => {
                let mut g = &args[1];
                while let Some(a) = g.match_functor("^", 2) {
                    g = &a[1];
                }
                self.goal(g);
            }
            ("maplist", n) if (2..=7).contains(&n) => self.closure(&args[0], n - 1),
            ("include" | "exclude", 3) | ("partition", 4) => self.closure(&args[0], 1),
            ("foldl", n) if (4..=6).contains(&n) => self.closure(&args[0], n - 1),
            ("phrase", 2 | 3) => self.dcg_body(&args[0]),
            _ => {}
        }
    }

    /// A closure called with `extra` more arguments.
    fn closure(&mut self, t: &Term, extra: usize) {
        if let Some(args) = t.match_functor(":", 2) {
            if let (Some(m), Some((n, a))) = (args[0].as_atom(), args[1].name_arity()) {
                let mut qualified = pi(n, a + extra);
                qualified.module = Some(m.to_string());
                self.record(qualified, &args[1]);
            }
            return;
        }
        if extra == 0 {
            self.goal(t);
            return;
        }
        if let (true, Some((n, a))) = (t.is_callable(), t.name_arity()) {
            self.record(pi(n, a + extra), t);
        }
    }

    fn dcg_body(&mut self, t: &Term) {
        if matches!(t.kind, TermKind::List { .. } | TermKind::Str(_) | TermKind::Var { .. }) {
            return;
        }
        if let TermKind::Curly(inner) = &t.kind {
            self.goal(inner);
            return;
        }
        let Some((name, arity)) = t.name_arity() else { return };
        let args = t.args();
        match (name, arity) {
            ("," | ";" | "|" | "->", 2) => {
                self.dcg_body(&args[0]);
                self.dcg_body(&args[1]);
            }
            ("\\+", 1) => self.dcg_body(&args[0]),
            ("[]", 0) | ("!", 0) => {}
            ("call", n) if n >= 1 => self.closure(&args[0], n - 1 + 2),
            _ => self.record(pi(name, arity + 2), t),
        }
    }
}
