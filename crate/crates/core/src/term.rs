//! The typed syntax tree produced by the reader.

use std::collections::HashMap;
use std::fmt;

use crate::ops::OperatorDef;
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub kind: TermKind,
    /// Extent of the whole term, including any enclosing parentheses the
    /// reader consumed for it.
    pub span: SourceSpan,
    /// The functor or operator token for compounds and operator
    /// applications; equal to `span` for leaves.
    pub functor_span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    Atom(String),
    Var { name: String, id: usize },
    Int(i64),
    Float(f64),
    Str(String),
    Compound { functor: String, args: Vec<Term> },
    /// `[a, b | T]`; `tail` is `None` for a proper list.
    List { items: Vec<Term>, tail: Option<Box<Term>> },
    Curly(Box<Term>),
    Op { def: OperatorDef, args: Vec<Term> },
}

impl Term {
    pub fn new(kind: TermKind, span: SourceSpan) -> Self {
        Term { kind, span, functor_span: span }
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Term::new(TermKind::Atom(name.into()), SourceSpan::default())
    }

    pub fn var(name: impl Into<String>, id: usize) -> Self {
        Term::new(TermKind::Var { name: name.into(), id }, SourceSpan::default())
    }

    pub fn int(v: i64) -> Self {
        Term::new(TermKind::Int(v), SourceSpan::default())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Self {
        if args.is_empty() {
            return Term::atom(functor);
        }
        Term::new(TermKind::Compound { functor: functor.into(), args }, SourceSpan::default())
    }

    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Self {
        if items.is_empty() {
            return tail.unwrap_or_else(|| Term::atom("[]"));
        }
        Term::new(TermKind::List { items, tail: tail.map(Box::new) }, SourceSpan::default())
    }

    /// Name and arity when the term is callable (atom or compound form).
    pub fn name_arity(&self) -> Option<(&str, usize)> {
        match &self.kind {
            TermKind::Atom(a) => Some((a, 0)),
            TermKind::Compound { functor, args } => Some((functor, args.len())),
            TermKind::Op { def, args } => Some((&def.name, args.len())),
            TermKind::List { .. } => Some((".", 2)),
            TermKind::Curly(_) => Some(("{}", 1)),
            _ => None,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(
            self.kind,
            TermKind::Atom(_) | TermKind::Compound { .. } | TermKind::Op { .. } | TermKind::Curly(_)
        )
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.kind {
            TermKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self.kind, TermKind::Var { .. })
    }

    /// Arguments of a compound-form term. Lists expose head and tail only
    /// through [`Term::list_parts`].
    pub fn args(&self) -> &[Term] {
        match &self.kind {
            TermKind::Compound { args, .. } | TermKind::Op { args, .. } => args,
            TermKind::Curly(inner) => std::slice::from_ref(inner),
            _ => &[],
        }
    }

    /// If the term has functor `name/arity`, its arguments.
    pub fn match_functor(&self, name: &str, arity: usize) -> Option<&[Term]> {
        match self.name_arity() {
            Some((n, a)) if n == name && a == arity && !matches!(self.kind, TermKind::List { .. }) => {
                Some(self.args())
            }
            _ => None,
        }
    }

    /// Proper-list elements, or `None` for partial or non-lists.
    pub fn list_items(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match &cur.kind {
                TermKind::Atom(a) if a == "[]" => return Some(out),
                TermKind::List { items, tail } => {
                    out.extend(items.iter());
                    match tail {
                        Some(t) => cur = t,
                        None => return Some(out),
                    }
                }
                TermKind::Compound { functor, args } if functor == "." && args.len() == 2 => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Flatten a right-nested `,`/2 conjunction.
    pub fn conjuncts(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Some(args) = cur.match_functor(",", 2) {
            out.push(&args[0]);
            cur = &args[1];
        }
        out.push(cur);
        out
    }

    /// Depth-first pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match &self.kind {
            TermKind::Compound { args, .. } | TermKind::Op { args, .. } => args.iter().for_each(|a| a.walk(f)),
            TermKind::List { items, tail } => {
                items.iter().for_each(|a| a.walk(f));
                if let Some(t) = tail {
                    t.walk(f);
                }
            }
            TermKind::Curly(inner) => inner.walk(f),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Term)) {
        f(self);
        match &mut self.kind {
            TermKind::Compound { args, .. } | TermKind::Op { args, .. } => args.iter_mut().for_each(|a| a.walk_mut(f)),
            TermKind::List { items, tail } => {
                items.iter_mut().for_each(|a| a.walk_mut(f));
                if let Some(t) = tail {
                    t.walk_mut(f);
                }
            }
            TermKind::Curly(inner) => inner.walk_mut(f),
            _ => {}
        }
    }

    /// Variable names in order of first occurrence, `_` excluded.
    pub fn variable_names(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        self.walk(&mut |t| {
            if let TermKind::Var { name, .. } = &t.kind {
                if name != "_" && !seen.contains(name) {
                    seen.push(name.clone());
                }
            }
        });
        seen
    }

    /// Renumber variables by first occurrence; every `_` gets a fresh id.
    /// Returns the number of distinct variables.
    pub fn number_vars(&mut self) -> usize {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut next = 0;
        self.walk_mut(&mut |t| {
            if let TermKind::Var { name, id } = &mut t.kind {
                *id = if name == "_" {
                    next += 1;
                    next - 1
                } else {
                    *ids.entry(name.clone()).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                };
            }
        });
        next
    }

    /// The term's structure with spans, list sugar and operator notation
    /// erased.
    pub fn shape(&self) -> Shape {
        let mut vars = HashMap::new();
        self.shape_in(&mut vars)
    }

    fn shape_in(&self, vars: &mut HashMap<(String, usize), usize>) -> Shape {
        match &self.kind {
            TermKind::Atom(a) => Shape::Atom(a.clone()),
            TermKind::Var { name, id } => {
                let n = vars.len();
                let key = if name == "_" { (format!("_#{id}"), *id) } else { (name.clone(), 0) };
                Shape::Var(*vars.entry(key).or_insert(n))
            }
            TermKind::Int(i) => Shape::Int(*i),
            TermKind::Float(f) => Shape::Float(f.to_bits()),
            TermKind::Str(s) => Shape::Str(s.clone()),
            TermKind::Compound { functor, args } => {
                Shape::Compound(functor.clone(), args.iter().map(|a| a.shape_in(vars)).collect())
            }
            TermKind::Op { def, args } => {
                Shape::Compound(def.name.clone(), args.iter().map(|a| a.shape_in(vars)).collect())
            }
            TermKind::Curly(inner) => Shape::Compound("{}".into(), vec![inner.shape_in(vars)]),
            TermKind::List { items, tail } => {
                let heads: Vec<Shape> = items.iter().map(|a| a.shape_in(vars)).collect();
                let mut acc = match tail {
                    Some(t) => t.shape_in(vars),
                    None => Shape::Atom("[]".into()),
                };
                for h in heads.into_iter().rev() {
                    acc = Shape::Compound(".".into(), vec![h, acc]);
                }
                acc
            }
        }
    }

    /// Equality ignoring spans and notation.
    pub fn structurally_eq(&self, other: &Term) -> bool {
        self.shape() == other.shape()
    }
}

/// Notation-free structure of a term. Variables are numbered by first
/// occurrence, so alpha-equivalent terms have equal shapes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Atom(String),
    Var(usize),
    Int(i64),
    Float(u64),
    Str(String),
    Compound(String, Vec<Shape>),
}

impl fmt::Display for Shape {
    /// Canonical functional notation, e.g. `+(a,*(b,c))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Atom(a) => f.write_str(&crate::printer::quote_atom(a)),
            Shape::Var(n) => write!(f, "_{n}"),
            Shape::Int(i) => write!(f, "{i}"),
            Shape::Float(bits) => f.write_str(&crate::printer::format_float(f64::from_bits(*bits))),
            Shape::Str(s) => f.write_str(&crate::printer::quote_string(s)),
            Shape::Compound(name, args) => {
                f.write_str(&crate::printer::quote_atom(name))?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
