//! Term output in operator notation with minimal parentheses.
//!
//! The output re-reads to a structurally equal term under the same
//! operator table. Spacing is compact (`a+b*c`) except where two tokens
//! would otherwise fuse.

use crate::lexer::{is_alnum, is_symbol_char};
use crate::ops::{OpClass, OperatorTable};
use crate::term::{Term, TermKind};

pub fn pretty_print(term: &Term, ops: &OperatorTable) -> String {
    let mut p = Printer { ops, out: String::new() };
    p.term(term, 1200, Ctx::Top);
    p.out
}

/// Print with variables renamed `A`, `B`, … in order of first occurrence.
pub fn print_with_fresh_vars(term: &Term, ops: &OperatorTable) -> String {
    let names = term.variable_names();
    let mut renamed = term.clone();
    renamed.walk_mut(&mut |t| {
        if let TermKind::Var { name, .. } = &mut t.kind {
            if let Some(i) = names.iter().position(|n| n == name) {
                *name = letter_name(i);
            }
        }
    });
    pretty_print(&renamed, ops)
}

fn letter_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    /// Argument of a compound or list element.
    Arg,
    /// Operand of an operator.
    Operand,
}

struct Printer<'a> {
    ops: &'a OperatorTable,
    out: String,
}

impl Printer<'_> {
    /// Append `s`, separating it from the previous output when the two
    /// would lex as one token.
    fn emit(&mut self, s: &str) {
        if let (Some(last), Some(first)) = (self.out.chars().last(), s.chars().next()) {
            let fuse = (is_symbol_char(last) && is_symbol_char(first))
                || (is_alnum(last) && is_alnum(first))
                || (last == ',' && first == ',');
            if fuse {
                self.out.push(' ');
            }
        }
        self.out.push_str(s);
    }

    fn term(&mut self, t: &Term, max: u16, ctx: Ctx) {
        match &t.kind {
            TermKind::Atom(a) => {
                let q = quote_atom(a);
                if ctx == Ctx::Operand && self.ops.is_op(a) && a != "[]" && a != "{}" {
                    self.emit("(");
                    self.emit(&q);
                    self.emit(")");
                } else {
                    self.emit(&q);
                }
            }
            TermKind::Var { name, .. } => self.emit(name),
            TermKind::Int(i) => self.number(&i.to_string(), *i < 0, ctx),
            TermKind::Float(f) => self.number(&format_float(*f), f.is_sign_negative(), ctx),
            TermKind::Str(s) => self.emit(&quote_string(s)),
            TermKind::List { items, tail } => {
                self.emit("[");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.emit(",");
                    }
                    self.term(item, 999, Ctx::Arg);
                }
                if let Some(tail) = tail {
                    self.emit("|");
                    self.term(tail, 999, Ctx::Arg);
                }
                self.emit("]");
            }
            TermKind::Curly(inner) => {
                self.emit("{");
                self.term(inner, 1200, Ctx::Top);
                self.emit("}");
            }
            TermKind::Compound { functor, args } => self.compound(functor, args, max),
            TermKind::Op { def, args } => self.compound(&def.name, args, max),
        }
    }

    fn number(&mut self, text: &str, negative: bool, ctx: Ctx) {
        if negative && ctx == Ctx::Operand {
            self.emit("(");
            self.emit(text);
            self.emit(")");
        } else {
            self.emit(text);
        }
    }

    fn compound(&mut self, name: &str, args: &[Term], max: u16) {
        if args.len() == 2 {
            if let Some(def) = self.ops.infix(name).cloned() {
                let paren = def.priority > max;
                if paren {
                    self.emit("(");
                }
                self.term(&args[0], def.left_max(), Ctx::Operand);
                let op = if name == "," { ",".to_string() } else { quote_atom(name) };
                if op.starts_with(is_alnum) {
                    self.out.push(' ');
                    self.out.push_str(&op);
                    self.out.push(' ');
                } else {
                    self.emit(&op);
                }
                self.term(&args[1], def.right_max(), Ctx::Operand);
                if paren {
                    self.emit(")");
                }
                return;
            }
        }
        // `- 1` is a negative literal to some readers, so a sign applied to
        // a number is written `-(1)`.
        let sign_on_number = args.len() == 1
            && (name == "-" || name == "+")
            && matches!(args[0].kind, TermKind::Int(_) | TermKind::Float(_));
        if args.len() == 1 && !sign_on_number {
            if let Some(def) = self.ops.prefix(name).cloned() {
                let paren = def.priority > max;
                if paren {
                    self.emit("(");
                }
                let op = quote_atom(name);
                self.emit(&op);
                let before = self.out.len();
                self.term(&args[0], def.right_max(), Ctx::Operand);
                let next = self.out[before..].chars().next();
                let needs_space = op.starts_with(is_alnum)
                    || matches!(next, Some(c) if c == '(' || c.is_ascii_digit());
                if needs_space && !self.out[before..].starts_with(' ') {
                    self.out.insert(before, ' ');
                }
                if paren {
                    self.emit(")");
                }
                return;
            }
            if let Some(def) = self.ops.postfix(name).cloned() {
                let paren = def.priority > max;
                if paren {
                    self.emit("(");
                }
                self.term(&args[0], def.left_max(), Ctx::Operand);
                let op = quote_atom(name);
                if op.starts_with(is_alnum) {
                    self.out.push(' ');
                }
                self.emit(&op);
                if paren {
                    self.emit(")");
                }
                return;
            }
        }
        self.emit(&quote_functor(name));
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.term(a, 999, Ctx::Arg);
        }
        self.out.push(')');
    }
}

fn atom_needs_quotes(a: &str) -> bool {
    let mut chars = a.chars();
    let Some(first) = chars.next() else {
        return true;
    };
    if matches!(a, "[]" | "{}" | "!" | ";") {
        return false;
    }
    if first.is_alphabetic() && !first.is_uppercase() {
        return !a.chars().all(is_alnum);
    }
    if a.chars().all(is_symbol_char) {
        return a == "." || a.starts_with("/*");
    }
    true
}

/// Atom text as it must be written to read back as the same atom.
pub fn quote_atom(a: &str) -> String {
    if atom_needs_quotes(a) {
        quote_with(a, '\'')
    } else {
        a.to_string()
    }
}

fn quote_functor(a: &str) -> String {
    match a {
        "[]" | "{}" => format!("'{a}'"),
        _ => quote_atom(a),
    }
}

pub fn quote_string(s: &str) -> String {
    quote_with(s, '"')
}

fn quote_with(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c);
            }
            c if c.is_control() => out.push_str(&format!("\\x{:x}\\", c as u32)),
            c => out.push(c),
        }
    }
    out.push(q);
    out
}

/// Shortest decimal form that reads back as the same float, always with a
/// fraction part (`1.0e20`, not `1e20`).
pub fn format_float(f: f64) -> String {
    if f.is_nan() {
        return "1.5NaN".into();
    }
    if f.is_infinite() {
        return if f > 0.0 { "1.0Inf".into() } else { "-1.0Inf".into() };
    }
    let s = format!("{f:?}");
    match s.find('e') {
        Some(i) if !s[..i].contains('.') => format!("{}.0{}", &s[..i], &s[i..]),
        _ => s,
    }
}

/// The class an operator-notation term prints in, if any.
pub fn notation(term: &Term, ops: &OperatorTable) -> Option<OpClass> {
    let (name, arity) = term.name_arity()?;
    match arity {
        2 if ops.infix(name).is_some() => Some(OpClass::Infix),
        1 if ops.prefix(name).is_some() => Some(OpClass::Prefix),
        1 if ops.postfix(name).is_some() => Some(OpClass::Postfix),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::database::Database;
    use crate::reader::parse_term_text;

    fn round(src: &str) -> String {
        let db = Database::default();
        let t = parse_term_text(src, &db).unwrap();
        let printed = pretty_print(&t, &db.ops);
        let back = parse_term_text(&printed, &db).unwrap_or_else(|e| panic!("{printed}: {}", e.message));
        assert_eq!(t.shape(), back.shape(), "{src} -> {printed}");
        printed
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(round("a + b * c"), "a+b*c");
        assert_eq!(round("(a + b) * c"), "(a+b)*c");
        assert_eq!(round("a - (b - c)"), "a-(b-c)");
        assert_eq!(round("a - b - c"), "a-b-c");
        assert_eq!(round("X is Y mod 2"), "X is Y mod 2");
        assert_eq!(round("(a :- b, c)"), "a:-b,c");
        assert_eq!(round("f((a, b), (c :- d))"), "f((a,b),(c:-d))");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote_atom("hello world"), "'hello world'");
        assert_eq!(quote_atom("foo"), "foo");
        assert_eq!(quote_atom("Foo"), "'Foo'");
        assert_eq!(quote_atom("[]"), "[]");
        assert_eq!(quote_atom(""), "''");
        assert_eq!(quote_atom("it's"), "'it\\'s'");
        assert_eq!(quote_atom(","), "','");
        assert_eq!(quote_atom("|"), "'|'");
        assert_eq!(quote_atom("."), "'.'");
        assert_eq!(quote_atom("=.."), "=..");
        assert_eq!(round("'hello world'"), "'hello world'");
    }

    #[test]
    fn lists_and_curly() {
        assert_eq!(round("[1, 2]"), "[1,2]");
        assert_eq!(round("[a|T]"), "[a|T]");
        assert_eq!(round("{a, b}"), "{a,b}");
        assert_eq!(round("'[]'(x)"), "'[]'(x)");
    }

    #[test]
    fn signs_and_fusing() {
        assert_eq!(round("- 1"), "-(1)");
        assert_eq!(round("-(1)"), "-(1)");
        assert_eq!(round("-1"), "-1");
        assert_eq!(round("a - -1"), "a-(-1)");
        assert_eq!(round("- - a"), "- -a");
        assert_eq!(round("- (a, b)"), "- (a,b)");
        assert_eq!(round("1 - 2"), "1-2");
        assert_eq!(round("a = \\+"), "a=(\\+)");
        assert_eq!(round("- = a"), "(-)=a");
        assert_eq!(round("f(-)"), "f(-)");
        assert_eq!(round("(-1) ^ 2"), "(-1)^2");
        assert_eq!(round("\\+ (a = b)"), "\\+a=b");
        assert_eq!(round("'@@' = '##'"), "@@ = ##");
    }

    #[test]
    fn floats_read_back() {
        assert_eq!(format_float(1e20), "1.0e20");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(round("1.0e20"), "1.0e20");
        assert_eq!(round("-2.5"), "-2.5");
    }

    #[test]
    fn fresh_variable_names() {
        let db = Database::default();
        let t = parse_term_text("foo(Xs, _, Ys, Xs)", &db).unwrap();
        assert_eq!(print_with_fresh_vars(&t, &db.ops), "foo(A,_,B,A)");
    }
}
