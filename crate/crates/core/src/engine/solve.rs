//! Depth-first SLD resolution over the clauses of one database.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::catalog::Catalog;
use crate::database::{Database, PredicateIndicator};
use crate::span::SourceSpan;
use crate::term::{Term, TermKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    /// Deepest chain of predicate calls on one branch.
    pub max_depth: usize,
    pub max_solutions: usize,
    /// Resolution steps before giving up.
    pub max_steps: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { max_depth: 10_000, max_solutions: usize::MAX, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    Existence(PredicateIndicator),
    /// A known built-in this engine does not run.
    Unsupported(PredicateIndicator),
    Instantiation(String),
    Type { expected: &'static str, culprit: String },
    Evaluation(&'static str),
    Resource(&'static str),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Existence(pi) => write!(f, "existence error: unknown procedure {pi}"),
            SolveError::Unsupported(pi) => write!(f, "{pi} is not supported by this engine"),
            SolveError::Instantiation(ctx) => write!(f, "instantiation error in {ctx}"),
            SolveError::Type { expected, culprit } => write!(f, "type error: {expected} expected, found {culprit}"),
            SolveError::Evaluation(what) => write!(f, "evaluation error: {what}"),
            SolveError::Resource(what) => write!(f, "resource error: {what}"),
        }
    }
}

impl std::error::Error for SolveError {}

/// Values of the query's named variables for one solution, in order of
/// first occurrence. Unbound variables are omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Binding {
    pub vars: Vec<(String, Term)>,
}

impl Binding {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

#[derive(Clone, Debug)]
enum RTerm {
    Var(usize),
    Atom(Rc<str>),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    Cmp(Rc<str>, Rc<[RTerm]>),
}

impl RTerm {
    fn atom(a: &str) -> RTerm {
        RTerm::Atom(a.into())
    }

    fn cmp(f: &str, args: Vec<RTerm>) -> RTerm {
        if args.is_empty() {
            RTerm::atom(f)
        } else {
            RTerm::Cmp(f.into(), args.into())
        }
    }

    fn functor(&self) -> Option<(&str, usize)> {
        match self {
            RTerm::Atom(a) => Some((a, 0)),
            RTerm::Cmp(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    fn args(&self) -> &[RTerm] {
        match self {
            RTerm::Cmp(_, args) => args,
            _ => &[],
        }
    }

    fn offset(&self, by: usize) -> RTerm {
        match self {
            RTerm::Var(v) => RTerm::Var(v + by),
            RTerm::Cmp(f, args) => RTerm::Cmp(f.clone(), args.iter().map(|a| a.offset(by)).collect()),
            t => t.clone(),
        }
    }
}

/// Convert with variables numbered through `vars` (name -> id).
fn from_term(t: &Term, vars: &mut HashMap<String, usize>, next: &mut usize) -> RTerm {
    match &t.kind {
        TermKind::Atom(a) => RTerm::atom(a),
        TermKind::Var { name, .. } => {
            let fresh = |next: &mut usize| {
                *next += 1;
                *next - 1
            };
            if name == "_" {
                RTerm::Var(fresh(next))
            } else {
                RTerm::Var(*vars.entry(name.clone()).or_insert_with(|| fresh(next)))
            }
        }
        TermKind::Int(i) => RTerm::Int(*i),
        TermKind::Float(f) => RTerm::Float(*f),
        TermKind::Str(s) => RTerm::Str(s.as_str().into()),
        TermKind::Compound { functor, args } => {
            RTerm::cmp(functor, args.iter().map(|a| from_term(a, vars, next)).collect())
        }
        TermKind::Op { def, args } => RTerm::cmp(&def.name, args.iter().map(|a| from_term(a, vars, next)).collect()),
        TermKind::Curly(inner) => RTerm::cmp("{}", vec![from_term(inner, vars, next)]),
        TermKind::List { items, tail } => {
            let mut acc = match tail {
                Some(t) => from_term(t, vars, next),
                None => RTerm::atom("[]"),
            };
            let heads: Vec<RTerm> = items.iter().map(|i| from_term(i, vars, next)).collect();
            for h in heads.into_iter().rev() {
                acc = RTerm::cmp(".", vec![h, acc]);
            }
            acc
        }
    }
}

struct CClause {
    head: RTerm,
    body: RTerm,
    nvars: usize,
}

#[derive(Clone)]
enum Goal {
    Call(RTerm, usize),
    /// Drop choicepoints above this height.
    CutTo(usize),
}

struct Frame {
    goal: Goal,
    next: Cont,
}

type Cont = Option<Rc<Frame>>;

fn push(goal: Goal, next: Cont) -> Cont {
    Some(Rc::new(Frame { goal, next }))
}

enum Alt {
    Cont(Cont),
    Clauses { goal: RTerm, depth: usize, cont: Cont, clauses: Rc<[CClause]>, next: usize },
}

struct Choice {
    trail: usize,
    vars: usize,
    alt: Alt,
}

/// A lazy stream of solutions; iteration stops after the first error.
pub struct Solutions<'db> {
    db: &'db Database,
    limits: SolveLimits,
    compiled: HashMap<(String, usize), Rc<[CClause]>>,
    bindings: Vec<Option<RTerm>>,
    trail: Vec<usize>,
    choices: Vec<Choice>,
    goals: Cont,
    query_vars: Vec<(String, usize)>,
    steps: usize,
    found: usize,
    started: bool,
    done: bool,
    warnings: Vec<String>,
}

pub fn solve<'db>(goal: &Term, db: &'db Database, limits: SolveLimits) -> Solutions<'db> {
    let mut vars = HashMap::new();
    let mut next = 0;
    let g = from_term(goal, &mut vars, &mut next);
    let mut query_vars: Vec<(String, usize)> = vars.into_iter().collect();
    query_vars.sort_by_key(|(_, id)| *id);
    Solutions {
        db,
        limits,
        compiled: HashMap::new(),
        bindings: vec![None; next],
        trail: Vec::new(),
        choices: Vec::new(),
        goals: push(Goal::Call(g, 0), None),
        query_vars,
        steps: 0,
        found: 0,
        started: false,
        done: false,
        warnings: Vec::new(),
    }
}

type Step = Result<bool, SolveError>;

impl Solutions<'_> {
    /// Whether backtracking could still produce another solution.
    pub fn has_more(&self) -> bool {
        !self.done && !self.choices.is_empty() && self.found < self.limits.max_solutions
    }

    /// Non-fatal notes, e.g. about cut being treated as `true`.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn deref(&self, t: &RTerm) -> RTerm {
        let mut cur = t.clone();
        while let RTerm::Var(v) = cur {
            match &self.bindings[v] {
                Some(b) => cur = b.clone(),
                None => return cur,
            }
        }
        cur
    }

    fn bind(&mut self, v: usize, t: RTerm) {
        self.bindings[v] = Some(t);
        self.trail.push(v);
    }

    fn fresh(&mut self) -> RTerm {
        self.bindings.push(None);
        RTerm::Var(self.bindings.len() - 1)
    }

    fn undo_to(&mut self, trail: usize, vars: usize) {
        while self.trail.len() > trail {
            let v = self.trail.pop().expect("trail entry");
            self.bindings[v] = None;
        }
        self.bindings.truncate(vars);
    }

    /// Whether `v` appears in `t` under the current bindings. Checked on
    /// every binding, so cyclic terms never form.
    fn occurs(&self, v: usize, t: &RTerm) -> bool {
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            match self.deref(&t) {
                RTerm::Var(w) if w == v => return true,
                RTerm::Cmp(_, args) => stack.extend(args.iter().cloned()),
                _ => {}
            }
        }
        false
    }

    fn unify(&mut self, a: &RTerm, b: &RTerm) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let (x, y) = (self.deref(&x), self.deref(&y));
            match (&x, &y) {
                (RTerm::Var(i), RTerm::Var(j)) => {
                    if i != j {
                        // bind the younger variable to the older one
                        let (old, young) = if i < j { (*i, *j) } else { (*j, *i) };
                        self.bind(young, RTerm::Var(old));
                    }
                }
                (RTerm::Var(i), _) | (_, RTerm::Var(i)) => {
                    let t = if matches!(x, RTerm::Var(_)) { &y } else { &x };
                    if self.occurs(*i, t) {
                        return false;
                    }
                    self.bind(*i, t.clone());
                }
                (RTerm::Atom(p), RTerm::Atom(q)) | (RTerm::Str(p), RTerm::Str(q)) => {
                    if p != q {
                        return false;
                    }
                }
                (RTerm::Int(p), RTerm::Int(q)) => {
                    if p != q {
                        return false;
                    }
                }
                (RTerm::Float(p), RTerm::Float(q)) => {
                    if p.to_bits() != q.to_bits() {
                        return false;
                    }
                }
                (RTerm::Cmp(f, xs), RTerm::Cmp(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                _ => return false,
            }
        }
        true
    }

    fn identical(&self, a: &RTerm, b: &RTerm) -> bool {
        match (self.deref(a), self.deref(b)) {
            (RTerm::Var(i), RTerm::Var(j)) => i == j,
            (RTerm::Atom(p), RTerm::Atom(q)) | (RTerm::Str(p), RTerm::Str(q)) => p == q,
            (RTerm::Int(p), RTerm::Int(q)) => p == q,
            (RTerm::Float(p), RTerm::Float(q)) => p.to_bits() == q.to_bits(),
            (RTerm::Cmp(f, xs), RTerm::Cmp(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.identical(x, y))
            }
            _ => false,
        }
    }

    fn clauses(&mut self, name: &str, arity: usize) -> Option<Rc<[CClause]>> {
        let key = (name.to_string(), arity);
        if let Some(c) = self.compiled.get(&key) {
            return Some(c.clone());
        }
        let entry = self.db.lookup(&PredicateIndicator::new(name, arity))?;
        let compiled: Rc<[CClause]> = entry
            .clauses
            .iter()
            .map(|c| {
                let mut vars = HashMap::new();
                let mut next = 0;
                let head = from_term(&c.head, &mut vars, &mut next);
                let body = from_term(&c.body, &mut vars, &mut next);
                CClause { head, body, nvars: next }
            })
            .collect();
        self.compiled.insert(key, compiled.clone());
        Some(compiled)
    }

    /// Cheap first-argument test used to avoid leaving useless
    /// choicepoints.
    fn may_match(&self, clause: &CClause, goal: &RTerm) -> bool {
        let (Some(h), Some(g)) = (clause.head.args().first(), goal.args().first()) else {
            return true;
        };
        match (h, self.deref(g)) {
            (RTerm::Var(_), _) | (_, RTerm::Var(_)) => true,
            (RTerm::Cmp(f, xs), RTerm::Cmp(g, ys)) => *f == g && xs.len() == ys.len(),
            (RTerm::Atom(p), RTerm::Atom(q)) => *p == q,
            (RTerm::Int(p), RTerm::Int(q)) => *p == q,
            (RTerm::Cmp(..), _) | (_, RTerm::Cmp(..)) => false,
            _ => true,
        }
    }

    fn try_clauses(&mut self, goal: RTerm, depth: usize, cont: Cont, clauses: Rc<[CClause]>, start: usize) -> bool {
        let mut i = start;
        while i < clauses.len() {
            if !self.may_match(&clauses[i], &goal) {
                i += 1;
                continue;
            }
            let rest = (i + 1..clauses.len()).find(|&j| self.may_match(&clauses[j], &goal));
            let (trail, vars) = (self.trail.len(), self.bindings.len());
            let base = vars;
            self.bindings.resize(vars + clauses[i].nvars, None);
            let head = clauses[i].head.offset(base);
            if self.unify(&head, &goal) {
                if let Some(next) = rest {
                    let alt = Alt::Clauses { goal, depth, cont: cont.clone(), clauses: clauses.clone(), next };
                    self.choices.push(Choice { trail, vars, alt });
                }
                let body = clauses[i].body.offset(base);
                self.goals = push(Goal::Call(body, depth + 1), cont);
                return true;
            }
            self.undo_to(trail, vars);
            i += 1;
        }
        false
    }

    fn backtrack(&mut self) -> bool {
        while let Some(choice) = self.choices.pop() {
            self.undo_to(choice.trail, choice.vars);
            match choice.alt {
                Alt::Cont(c) => {
                    self.goals = c;
                    return true;
                }
                Alt::Clauses { goal, depth, cont, clauses, next } => {
                    if self.try_clauses(goal, depth, cont, clauses, next) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Run until the goal list empties (a solution) or no choice is left.
    fn run(&mut self) -> Result<bool, SolveError> {
        loop {
            let Some(frame) = self.goals.take() else {
                return Ok(true);
            };
            self.goals = frame.next.clone();
            self.steps += 1;
            if self.steps > self.limits.max_steps {
                return Err(SolveError::Resource("step limit exceeded"));
            }
            let ok = match &frame.goal {
                Goal::CutTo(h) => {
                    self.choices.truncate(*h);
                    true
                }
                Goal::Call(t, depth) => self.call(t, *depth)?,
            };
            if !ok && !self.backtrack() {
                return Ok(false);
            }
        }
    }

    fn call(&mut self, t: &RTerm, depth: usize) -> Step {
        let goal = self.deref(t);
        let (name, arity) = match &goal {
            RTerm::Var(_) => return Err(SolveError::Instantiation("call/1".into())),
            g => match g.functor() {
                Some((n, a)) => (n.to_string(), a),
                None => return Err(type_error("callable", self.show(g))),
            },
        };
        let args = goal.args().to_vec();
        let rest = self.goals.clone();
        match (name.as_str(), arity) {
            ("true", 0) => Ok(true),
            ("fail" | "false", 0) => Ok(false),
            ("!", 0) => {
                if self.warnings.is_empty() {
                    self.warnings.push("cut (!) is treated as true".into());
                }
                Ok(true)
            }
            (",", 2) => {
                let rest = push(Goal::Call(args[1].clone(), depth), rest);
                self.goals = push(Goal::Call(args[0].clone(), depth), rest);
                Ok(true)
            }
            (";", 2) => {
                let left = self.deref(&args[0]);
                let h = self.choices.len();
                let else_branch = push(Goal::Call(args[1].clone(), depth), rest.clone());
                self.push_choice(Alt::Cont(else_branch));
                match left.functor() {
                    Some(("->", 2)) => {
                        let then = push(Goal::CutTo(h), push(Goal::Call(left.args()[1].clone(), depth), rest));
                        self.goals = push(Goal::Call(left.args()[0].clone(), depth), then);
                    }
                    _ => self.goals = push(Goal::Call(left, depth), rest),
                }
                Ok(true)
            }
            ("->", 2) => {
                let h = self.choices.len();
                let then = push(Goal::CutTo(h), push(Goal::Call(args[1].clone(), depth), rest));
                self.goals = push(Goal::Call(args[0].clone(), depth), then);
                Ok(true)
            }
            ("\\+" | "not", 1) => {
                let h = self.choices.len();
                self.push_choice(Alt::Cont(rest));
                let fail = push(Goal::CutTo(h), push(Goal::Call(RTerm::atom("fail"), depth), None));
                self.goals = push(Goal::Call(args[0].clone(), depth), fail);
                Ok(true)
            }
            ("call", n) if n >= 1 => {
                let g = self.deref(&args[0]);
                let g = match (&g, n) {
                    (_, 1) => g,
                    (RTerm::Atom(f), _) => RTerm::cmp(f, args[1..].to_vec()),
                    (RTerm::Cmp(f, xs), _) => RTerm::cmp(f, xs.iter().chain(&args[1..]).cloned().collect()),
                    (RTerm::Var(_), _) => return Err(SolveError::Instantiation(format!("call/{n}"))),
                    _ => return Err(type_error("callable", self.show(&g))),
                };
                if depth + 1 > self.limits.max_depth {
                    return Err(SolveError::Resource("depth limit exceeded"));
                }
                self.goals = push(Goal::Call(g, depth + 1), rest);
                Ok(true)
            }
            ("once", 1) | ("ignore", 1) => {
                let h = self.choices.len();
                if name == "ignore" {
                    self.push_choice(Alt::Cont(rest.clone()));
                }
                self.goals = push(Goal::Call(args[0].clone(), depth), push(Goal::CutTo(h), rest));
                Ok(true)
            }
            ("=", 2) => Ok(self.unify(&args[0], &args[1])),
            ("\\=", 2) => {
                let (trail, vars) = (self.trail.len(), self.bindings.len());
                let unifies = self.unify(&args[0], &args[1]);
                self.undo_to(trail, vars);
                Ok(!unifies)
            }
            ("==", 2) => Ok(self.identical(&args[0], &args[1])),
            ("\\==", 2) => Ok(!self.identical(&args[0], &args[1])),
            ("var", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Var(_))),
            ("nonvar", 1) => Ok(!matches!(self.deref(&args[0]), RTerm::Var(_))),
            ("atom", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Atom(_))),
            ("number", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Int(_) | RTerm::Float(_))),
            ("integer", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Int(_))),
            ("float", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Float(_))),
            ("atomic", 1) => Ok(!matches!(self.deref(&args[0]), RTerm::Var(_) | RTerm::Cmp(..))),
            ("compound", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Cmp(..))),
            ("callable", 1) => Ok(matches!(self.deref(&args[0]), RTerm::Atom(_) | RTerm::Cmp(..))),
            ("is", 2) => {
                let v = self.eval(&args[1])?;
                Ok(self.unify(&args[0], &v.into_term()))
            }
            ("=:=" | "=\\=" | "<" | ">" | "=<" | ">=", 2) => {
                let (a, b) = (self.eval(&args[0])?, self.eval(&args[1])?);
                let ord = a.compare(&b);
                Ok(match name.as_str() {
                    "=:=" => ord.is_eq(),
                    "=\\=" => ord.is_ne(),
                    "<" => ord.is_lt(),
                    ">" => ord.is_gt(),
                    "=<" => ord.is_le(),
                    _ => ord.is_ge(),
                })
            }
            ("functor", 3) => self.functor3(&args),
            ("arg", 3) => self.arg3(&args),
            ("=..", 2) => self.univ(&args),
            _ => {
                let Some(clauses) = self.clauses(&name, arity) else {
                    let pi = PredicateIndicator::new(name.as_str(), arity);
                    return Err(match Catalog::bundled().get(&name, arity) {
                        Some(_) => SolveError::Unsupported(pi),
                        None => SolveError::Existence(pi),
                    });
                };
                if depth + 1 > self.limits.max_depth {
                    return Err(SolveError::Resource("depth limit exceeded"));
                }
                Ok(self.try_clauses(goal, depth, rest, clauses, 0))
            }
        }
    }

    fn push_choice(&mut self, alt: Alt) {
        self.choices.push(Choice { trail: self.trail.len(), vars: self.bindings.len(), alt });
    }

    fn functor3(&mut self, args: &[RTerm]) -> Step {
        match self.deref(&args[0]) {
            RTerm::Var(_) => {
                let name = self.deref(&args[1]);
                let arity = match self.deref(&args[2]) {
                    RTerm::Int(n) if n >= 0 => n as usize,
                    RTerm::Var(_) => return Err(SolveError::Instantiation("functor/3".into())),
                    other => return Err(type_error("integer", self.show(&other))),
                };
                let built = match (&name, arity) {
                    (RTerm::Var(_), _) => return Err(SolveError::Instantiation("functor/3".into())),
                    (_, 0) => name.clone(),
                    (RTerm::Atom(f), n) => {
                        let vars = (0..n).map(|_| self.fresh()).collect();
                        RTerm::cmp(f, vars)
                    }
                    _ => return Err(type_error("atom", self.show(&name))),
                };
                Ok(self.unify(&args[0], &built))
            }
            t => {
                let (name, arity) = match &t {
                    RTerm::Cmp(f, xs) => (RTerm::Atom(f.clone()), xs.len()),
                    other => (other.clone(), 0),
                };
                Ok(self.unify(&args[1], &name) && self.unify(&args[2], &RTerm::Int(arity as i64)))
            }
        }
    }

    fn arg3(&mut self, args: &[RTerm]) -> Step {
        let n = match self.deref(&args[0]) {
            RTerm::Int(n) => n,
            RTerm::Var(_) => return Err(SolveError::Instantiation("arg/3".into())),
            other => return Err(type_error("integer", self.show(&other))),
        };
        match self.deref(&args[1]) {
            RTerm::Cmp(_, xs) => match usize::try_from(n).ok().filter(|&n| n >= 1 && n <= xs.len()) {
                Some(i) => Ok(self.unify(&args[2], &xs[i - 1])),
                None => Ok(false),
            },
            RTerm::Var(_) => Err(SolveError::Instantiation("arg/3".into())),
            other => Err(type_error("compound", self.show(&other))),
        }
    }

    fn univ(&mut self, args: &[RTerm]) -> Step {
        match self.deref(&args[0]) {
            RTerm::Var(_) => {
                let items = self.list_items(&args[1]).ok_or_else(|| SolveError::Instantiation("=../2".into()))?;
                let Some((head, rest)) = items.split_first() else {
                    return Err(SolveError::Type { expected: "non-empty list", culprit: "[]".into() });
                };
                let built = match (self.deref(head), rest.is_empty()) {
                    (h, true) if !matches!(h, RTerm::Var(_) | RTerm::Cmp(..)) => h,
                    (RTerm::Atom(f), false) => RTerm::cmp(&f, rest.to_vec()),
                    (RTerm::Var(_), _) => return Err(SolveError::Instantiation("=../2".into())),
                    (other, _) => return Err(type_error("atom", self.show(&other))),
                };
                Ok(self.unify(&args[0], &built))
            }
            t => {
                let items = match &t {
                    RTerm::Cmp(f, xs) => std::iter::once(RTerm::Atom(f.clone())).chain(xs.iter().cloned()).collect(),
                    other => vec![other.clone()],
                };
                let list = items.into_iter().rev().fold(RTerm::atom("[]"), |acc, x| RTerm::cmp(".", vec![x, acc]));
                Ok(self.unify(&args[1], &list))
            }
        }
    }

    fn list_items(&self, t: &RTerm) -> Option<Vec<RTerm>> {
        let mut out = Vec::new();
        let mut cur = self.deref(t);
        loop {
            match &cur {
                RTerm::Atom(a) if &**a == "[]" => return Some(out),
                RTerm::Cmp(f, xs) if &**f == "." && xs.len() == 2 => {
                    out.push(xs[0].clone());
                    cur = self.deref(&xs[1]);
                }
                _ => return None,
            }
        }
    }

    fn eval(&self, t: &RTerm) -> Result<Num, SolveError> {
        let t = self.deref(t);
        match &t {
            RTerm::Int(i) => Ok(Num::I(*i)),
            RTerm::Float(f) => Ok(Num::F(*f)),
            RTerm::Var(_) => Err(SolveError::Instantiation("arithmetic expression".into())),
            RTerm::Cmp(f, xs) if xs.len() <= 2 => {
                let vals = xs.iter().map(|x| self.eval(x)).collect::<Result<Vec<_>, _>>()?;
                apply(f, &vals).unwrap_or_else(|| Err(type_error("evaluable", format!("{f}/{}", xs.len()))))
            }
            RTerm::Atom(a) => Err(type_error("evaluable", format!("{a}/0"))),
            _ => Err(type_error("evaluable", self.show(&t))),
        }
    }

    /// Resolve a term for output; `None` when it is cyclic.
    fn resolve(&self, t: &RTerm, names: &HashMap<usize, &str>, path: &mut Vec<usize>) -> Option<Term> {
        let span = SourceSpan::default();
        Some(match t {
            RTerm::Var(v) => match &self.bindings[*v] {
                Some(b) => {
                    if path.contains(v) {
                        return None;
                    }
                    path.push(*v);
                    let r = self.resolve(b, names, path);
                    path.pop();
                    r?
                }
                None => match names.get(v) {
                    Some(n) => Term::var(*n, *v),
                    None => Term::var(format!("_G{v}"), *v),
                },
            },
            RTerm::Atom(a) => Term::atom(&**a),
            RTerm::Int(i) => Term::int(*i),
            RTerm::Float(f) => Term::new(TermKind::Float(*f), span),
            RTerm::Str(s) => Term::new(TermKind::Str(s.to_string()), span),
            RTerm::Cmp(f, xs) => {
                let args = xs.iter().map(|x| self.resolve(x, names, path)).collect::<Option<Vec<_>>>()?;
                match (&**f, args.len()) {
                    (".", 2) => {
                        let mut args = args;
                        let tail = args.pop().expect("tail");
                        let head = args.pop().expect("head");
                        match tail.kind {
                            TermKind::List { mut items, tail } => {
                                items.insert(0, head);
                                Term::new(TermKind::List { items, tail }, span)
                            }
                            TermKind::Atom(ref a) if a == "[]" => Term::list(vec![head], None),
                            _ => Term::list(vec![head], Some(tail)),
                        }
                    }
                    ("{}", 1) => Term::new(TermKind::Curly(Box::new(args.into_iter().next().expect("arg"))), span),
                    _ => Term::compound(&**f, args),
                }
            }
        })
    }

    fn show(&self, t: &RTerm) -> String {
        match self.resolve(t, &HashMap::new(), &mut Vec::new()) {
            Some(t) => crate::printer::pretty_print(&t, &self.db.ops),
            None => "<cyclic term>".into(),
        }
    }

    fn binding(&self) -> Option<Binding> {
        let names: HashMap<usize, &str> = self.query_vars.iter().map(|(n, id)| (*id, n.as_str())).collect();
        let mut vars = Vec::new();
        for (name, id) in &self.query_vars {
            let value = self.resolve(&RTerm::Var(*id), &names, &mut Vec::new())?;
            if !matches!(&value.kind, TermKind::Var { name: n, .. } if n == name) {
                vars.push((name.clone(), value));
            }
        }
        Some(Binding { vars })
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Binding, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done || self.found >= self.limits.max_solutions {
                return None;
            }
            if self.started && !self.backtrack() {
                self.done = true;
                return None;
            }
            self.started = true;
            match self.run() {
                Ok(true) => {}
                Ok(false) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
            // Cyclic answers have no finite binding; treat them as failure.
            if let Some(b) = self.binding() {
                self.found += 1;
                return Some(Ok(b));
            }
        }
    }
}

fn type_error(expected: &'static str, culprit: String) -> SolveError {
    SolveError::Type { expected, culprit }
}

#[derive(Clone, Copy, Debug)]
enum Num {
    I(i64),
    F(f64),
}

impl Num {
    fn f(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        }
    }

    fn into_term(self) -> RTerm {
        match self {
            Num::I(i) => RTerm::Int(i),
            Num::F(f) => RTerm::Float(f),
        }
    }

    fn compare(&self, other: &Num) -> std::cmp::Ordering {
        match (self, other) {
            (Num::I(a), Num::I(b)) => a.cmp(b),
            _ => self.f().partial_cmp(&other.f()).unwrap_or(std::cmp::Ordering::Equal),
        }
    }
}

fn int_only(vals: &[Num]) -> Result<(i64, i64), SolveError> {
    match vals {
        [Num::I(a), Num::I(b)] => Ok((*a, *b)),
        [a, b] => {
            let culprit = if matches!(a, Num::F(_)) { a.f() } else { b.f() };
            Err(type_error("integer", crate::printer::format_float(culprit)))
        }
        _ => unreachable!("binary operator"),
    }
}

fn overflow<T>(v: Option<T>) -> Result<T, SolveError> {
    v.ok_or(SolveError::Evaluation("int_overflow"))
}

/// `None` when `f/arity` is not an evaluable functor.
fn apply(f: &str, vals: &[Num]) -> Option<Result<Num, SolveError>> {
    use Num::{F, I};
    let r = match (f, vals) {
        ("-", [I(a)]) => overflow(a.checked_neg()).map(I),
        ("-", [a]) => Ok(F(-a.f())),
        ("+", [a]) => Ok(*a),
        ("abs", [I(a)]) => overflow(a.checked_abs()).map(I),
        ("abs", [a]) => Ok(F(a.f().abs())),
        ("float", [a]) => Ok(F(a.f())),
        ("+", [I(a), I(b)]) => overflow(a.checked_add(*b)).map(I),
        ("-", [I(a), I(b)]) => overflow(a.checked_sub(*b)).map(I),
        ("*", [I(a), I(b)]) => overflow(a.checked_mul(*b)).map(I),
        ("+", [a, b]) => Ok(F(a.f() + b.f())),
        ("-", [a, b]) => Ok(F(a.f() - b.f())),
        ("*", [a, b]) => Ok(F(a.f() * b.f())),
        ("/", [a, b]) => {
            if b.f() == 0.0 {
                Err(SolveError::Evaluation("zero_divisor"))
            } else {
                Ok(F(a.f() / b.f()))
            }
        }
        ("//" | "mod" | "rem", [_, _]) => int_only(vals).and_then(|(a, b)| {
            if b == 0 {
                return Err(SolveError::Evaluation("zero_divisor"));
            }
            let v = match f {
                "//" => a.checked_div(b),
                "rem" => a.checked_rem(b),
                _ => a.checked_rem(b).map(|r| if r != 0 && (r < 0) != (b < 0) { r + b } else { r }),
            };
            overflow(v).map(I)
        }),
        ("min", [a, b]) => Ok(if b.compare(a).is_lt() { *b } else { *a }),
        ("max", [a, b]) => Ok(if b.compare(a).is_gt() { *b } else { *a }),
        _ => return None,
    };
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{consult, EngineChain, NoLoader};
    use crate::printer::pretty_print;
    use crate::reader::parse_term_text;

    fn db_with(src: &str) -> Database {
        let mut db = Database::default();
        let c = consult(src, &mut db, &mut EngineChain::standard(), &mut NoLoader);
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        db
    }

    fn answers(db: &Database, goal: &str) -> Vec<String> {
        let g = parse_term_text(goal, db).unwrap();
        solve(&g, db, SolveLimits::default())
            .map(|r| match r {
                Ok(b) => b.vars.iter().map(|(n, t)| format!("{n}={}", pretty_print(t, &db.ops))).collect::<Vec<_>>().join(" "),
                Err(e) => format!("error: {e}"),
            })
            .collect()
    }

    #[test]
    fn unification_binds_through_structures() {
        let db = Database::default();
        assert_eq!(answers(&db, "X = f(Y), Y = 1"), ["X=f(1) Y=1"]);
        assert_eq!(answers(&db, "f(X, b) = f(a, X)"), Vec::<String>::new());
        assert_eq!(answers(&db, "X = Y"), ["Y=X"]);
        assert!(answers(&db, "X = f(X)").is_empty());
        assert!(answers(&db, "f(X, X) = f(X, f(a, X))").is_empty());
        assert!(answers(&db, "f(X, Y) = f(Y, g(X))").is_empty());
    }

    #[test]
    fn clauses_in_order() {
        let db = db_with("p(1). p(2).\nanc(X, Y) :- par(X, Y).\nanc(X, Y) :- par(X, Z), anc(Z, Y).\npar(a, b). par(b, c).");
        assert_eq!(answers(&db, "p(X)"), ["X=1", "X=2"]);
        assert_eq!(answers(&db, "anc(a, W)"), ["W=b", "W=c"]);
    }

    #[test]
    fn arithmetic() {
        let db = Database::default();
        assert_eq!(answers(&db, "X is 2+3*4"), ["X=14"]);
        assert_eq!(answers(&db, "X is 7/2"), ["X=3.5"]);
        assert_eq!(answers(&db, "X is 4/2"), ["X=2.0"]);
        assert_eq!(answers(&db, "X is -7 // 2, Y is -7 mod 2"), ["X=-3 Y=1"]);
        assert_eq!(answers(&db, "1 < 2.5, 3 =:= 3.0"), [""]);
        assert_eq!(answers(&db, "X is Y + 1"), ["error: instantiation error in arithmetic expression"]);
        assert_eq!(answers(&db, "X is foo + 1"), ["error: type error: evaluable expected, found foo/0"]);
        assert_eq!(answers(&db, "X is 1 // 0"), ["error: evaluation error: zero_divisor"]);
    }

    #[test]
    fn control_constructs() {
        let db = db_with("p(1). p(2). p(3).");
        assert_eq!(answers(&db, "(p(X), X > 1 -> Y = yes ; Y = no)"), ["X=2 Y=yes"]);
        assert_eq!(answers(&db, "(p(X) ; X = 9)"), ["X=1", "X=2", "X=3", "X=9"]);
        assert_eq!(answers(&db, "\\+ p(4)"), [""]);
        assert!(answers(&db, "\\+ p(1)").is_empty());
        assert_eq!(answers(&db, "call(p, 2)"), [""]);
        assert_eq!(answers(&db, "G = p(X), call(G)").len(), 3);
    }

    #[test]
    fn term_inspection() {
        let db = Database::default();
        assert_eq!(answers(&db, "functor(f(a, b), N, A)"), ["N=f A=2"]);
        assert_eq!(answers(&db, "functor(T, g, 2)"), ["T=g(_G1,_G2)"]);
        assert_eq!(answers(&db, "arg(2, f(a, b), X)"), ["X=b"]);
        assert_eq!(answers(&db, "f(a, b) =.. L"), ["L=[f,a,b]"]);
        assert_eq!(answers(&db, "T =.. [g, 1]"), ["T=g(1)"]);
        assert_eq!(answers(&db, "atom(a), var(_), nonvar(1), number(1.5)"), [""]);
        assert_eq!(answers(&db, "f(X) == f(X), f(X) \\== f(Y)"), [""]);
    }

    #[test]
    fn errors_and_limits() {
        let db = db_with("loop :- loop.");
        assert_eq!(answers(&db, "nope(1)"), ["error: existence error: unknown procedure nope/1"]);
        assert_eq!(answers(&db, "loop"), ["error: resource error: depth limit exceeded"]);
        assert_eq!(answers(&db, "member(1, [1])"), ["error: member/2 is not supported by this engine"]);
        let g = parse_term_text("(X = 1 ; X = 2 ; X = 3)", &db).unwrap();
        let limits = SolveLimits { max_solutions: 2, ..SolveLimits::default() };
        assert_eq!(solve(&g, &db, limits).count(), 2);
    }

    #[test]
    fn cut_is_true_with_a_warning() {
        let db = db_with("p(1) :- !. p(2).");
        let g = parse_term_text("p(X)", &db).unwrap();
        let mut s = solve(&g, &db, SolveLimits::default());
        assert_eq!(s.by_ref().count(), 2);
        assert_eq!(s.warnings().len(), 1);
    }
}
