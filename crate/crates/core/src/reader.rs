//! Sentence-at-a-time reader.
//!
//! Each call to [`Reader::read_sentence`] parses one clause or directive
//! against the operator table passed in, so a caller that executes `op/3`
//! directives between calls changes how the following sentences read.
//!
//! The parser is an operator-precedence (shift/reduce) parser driven by the
//! current token and one token of lookahead. On a syntax error the rest of
//! the sentence is dropped up to and including the next end token.

use crate::database::Database;
use crate::diag::{codes, Diagnostic};
use crate::lexer::{self, Number, Token, TokenKind};
use crate::ops::{Fixity, OperatorDef, OperatorTable};
use crate::span::{FileId, SourceSpan};
use crate::term::{Term, TermKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SentenceKind {
    Clause,
    Directive,
    DcgRule,
    Fact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sentence {
    pub kind: SentenceKind,
    pub term: Term,
    pub end_span: SourceSpan,
    /// Comment tokens between the previous end token and this sentence.
    pub leading_comments: Vec<Token>,
    /// From the first token through the end token.
    pub span: SourceSpan,
    /// Index range of this sentence's tokens in the file token list.
    pub token_range: std::ops::Range<usize>,
}

impl Sentence {
    /// Head of a clause, fact or grammar rule. For a grammar rule with a
    /// pushback list (`H, PB --> B`) this is `H`.
    pub fn head(&self) -> Option<&Term> {
        match self.kind {
            SentenceKind::Fact => Some(&self.term),
            SentenceKind::Clause => Some(&self.term.args()[0]),
            SentenceKind::DcgRule => {
                let h = &self.term.args()[0];
                Some(h.match_functor(",", 2).map(|a| &a[0]).unwrap_or(h))
            }
            SentenceKind::Directive => None,
        }
    }

    pub fn body(&self) -> Option<&Term> {
        match self.kind {
            SentenceKind::Clause | SentenceKind::DcgRule => Some(&self.term.args()[1]),
            _ => None,
        }
    }

    pub fn goal(&self) -> Option<&Term> {
        match self.kind {
            SentenceKind::Directive => Some(&self.term.args()[0]),
            _ => None,
        }
    }

    /// `name/arity` of the predicate this sentence defines; grammar rules
    /// report the translated arity.
    pub fn defines(&self) -> Option<(String, usize)> {
        let (name, arity) = self.head()?.name_arity()?;
        let arity = if self.kind == SentenceKind::DcgRule { arity + 2 } else { arity };
        Some((name.to_string(), arity))
    }
}

/// Outcome of reading one sentence.
#[derive(Clone, Debug)]
pub struct ReadResult {
    /// `None` when the sentence was malformed and skipped.
    pub sentence: Option<Sentence>,
    pub diagnostics: Vec<Diagnostic>,
    /// The region dropped by error recovery.
    pub skipped: Option<SourceSpan>,
}

#[derive(Clone, Debug)]
struct ParseError {
    code: &'static str,
    message: String,
    span: SourceSpan,
    /// Significant-token index where the error was detected.
    at: usize,
    /// Already reported by the lexer.
    silent: bool,
    related: Vec<(SourceSpan, String)>,
}

impl ParseError {
    fn into_diagnostic(self) -> Diagnostic {
        let mut d = Diagnostic::error(self.code, self.message, self.span);
        d.related = self.related;
        d
    }
}

type PResult<T> = Result<T, ParseError>;

/// A cursor over a file's tokens.
pub struct Reader<'t> {
    tokens: &'t [Token],
    /// Indices of non-layout, non-comment tokens.
    sig: Vec<usize>,
    pos: usize,
    eof: SourceSpan,
}

impl<'t> Reader<'t> {
    pub fn new(tokens: &'t [Token], file: FileId) -> Self {
        let sig = tokens.iter().enumerate().filter(|(_, t)| !t.kind.is_trivia()).map(|(i, _)| i).collect();
        let eof = match tokens.last() {
            Some(t) => SourceSpan {
                start: t.span.end,
                start_line: t.span.end_line,
                start_col: t.span.end_col,
                ..t.span
            },
            None => SourceSpan { file, start_line: 1, start_col: 1, end_line: 1, end_col: 1, ..Default::default() },
        };
        Reader { tokens, sig, pos: 0, eof }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.sig.len()
    }

    fn raw_index(&self, pos: usize) -> usize {
        self.sig.get(pos).copied().unwrap_or(self.tokens.len())
    }

    /// Read the next sentence using `db`'s operator table and flags.
    /// Returns `None` once only layout and comments remain.
    pub fn read_sentence(&mut self, db: &Database) -> Option<ReadResult> {
        if self.at_end() {
            return None;
        }
        let first_raw = if self.pos == 0 { 0 } else { self.raw_index(self.pos - 1) + 1 };
        let start_raw = self.raw_index(self.pos);
        let leading_comments: Vec<Token> =
            self.tokens[first_raw..start_raw].iter().filter(|t| t.kind.is_comment()).cloned().collect();

        let start = self.pos;
        let mut parser = Parser::new(self, &db.ops, DoubleQuotes::from_flag(db.flag("double_quotes")));
        let outcome = parser.sentence();
        let end_pos = parser.pos;
        match outcome {
            Ok((term, end_tok)) => {
                self.pos = end_pos;
                let end_span = end_tok.span;
                let span = self.tokens[start_raw].span.cover(end_span);
                let kind = classify_sentence(&term);
                let sentence = Sentence {
                    kind,
                    term,
                    end_span,
                    leading_comments,
                    span,
                    token_range: start_raw..self.raw_index(end_pos - 1) + 1,
                };
                Some(ReadResult { sentence: Some(sentence), diagnostics: Vec::new(), skipped: None })
            }
            Err(err) => {
                let diagnostics = if err.silent { Vec::new() } else { vec![err.into_diagnostic()] };
                let skipped = self.recover(start);
                Some(ReadResult { sentence: None, diagnostics, skipped: Some(skipped) })
            }
        }
    }

    /// Drop tokens from `from` through the next end token (or end of
    /// input). Returns the dropped region.
    pub fn recover(&mut self, from: usize) -> SourceSpan {
        let mut pos = from;
        while pos < self.sig.len() && self.tokens[self.sig[pos]].kind != TokenKind::End {
            pos += 1;
        }
        let last = if pos < self.sig.len() { pos } else { self.sig.len().saturating_sub(1) };
        self.pos = (pos + 1).min(self.sig.len().max(from));
        if from >= self.sig.len() {
            return self.eof;
        }
        self.tokens[self.sig[from]].span.cover(self.tokens[self.sig[last]].span)
    }

    /// Parse one term of priority at most `max_priority` at the cursor,
    /// without consuming an end token.
    pub fn parse_term(&mut self, max_priority: u16, db: &Database) -> Result<Term, Diagnostic> {
        let mut parser = Parser::new(self, &db.ops, DoubleQuotes::from_flag(db.flag("double_quotes")));
        let result = parser.parse(max_priority.min(1200)).map(|(t, _)| t);
        let pos = parser.pos;
        let furthest = parser.furthest.take();
        match result {
            Ok(mut t) => {
                self.pos = pos;
                t.number_vars();
                Ok(t)
            }
            Err(e) => Err(pick(furthest, e).into_diagnostic()),
        }
    }
}

fn classify_sentence(term: &Term) -> SentenceKind {
    match term.name_arity() {
        Some((":-" | "?-", 1)) if !matches!(term.kind, TermKind::List { .. }) => SentenceKind::Directive,
        Some((":-", 2)) => SentenceKind::Clause,
        Some(("-->", 2)) => SentenceKind::DcgRule,
        _ => SentenceKind::Fact,
    }
}

/// Parse a complete term from text, e.g. a goal typed by a user. A trailing
/// end token is accepted.
pub fn parse_term_text(text: &str, db: &Database) -> Result<Term, Diagnostic> {
    let (tokens, diags) = lexer::tokenize(text, db.file);
    if let Some(d) = diags.into_iter().next() {
        return Err(d);
    }
    let reader = Reader::new(&tokens, db.file);
    let mut parser = Parser::new(&reader, &db.ops, DoubleQuotes::from_flag(db.flag("double_quotes")));
    parser.whole().map_err(ParseError::into_diagnostic)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DoubleQuotes {
    Codes,
    Chars,
    Atom,
    Str,
}

impl DoubleQuotes {
    fn from_flag(flag: Option<&str>) -> Self {
        match flag {
            Some("codes") => DoubleQuotes::Codes,
            Some("chars") => DoubleQuotes::Chars,
            Some("atom") => DoubleQuotes::Atom,
            _ => DoubleQuotes::Str,
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::End => "end of clause".into(),
        _ => format!("`{}`", tok.text),
    }
}

fn pick(furthest: Option<ParseError>, current: ParseError) -> ParseError {
    match furthest {
        Some(f) if f.at > current.at => f,
        _ => current,
    }
}

struct Parser<'r, 't> {
    tokens: &'t [Token],
    sig: &'r [usize],
    pos: usize,
    eof: SourceSpan,
    ops: &'r OperatorTable,
    dq: DoubleQuotes,
    /// Open delimiters, innermost last.
    open: Vec<&'t Token>,
    furthest: Option<ParseError>,
}

impl<'r, 't> Parser<'r, 't> {
    fn new(reader: &'r Reader<'t>, ops: &'r OperatorTable, dq: DoubleQuotes) -> Self {
        Parser {
            tokens: reader.tokens,
            sig: &reader.sig,
            pos: reader.pos,
            eof: reader.eof,
            ops,
            dq,
            open: Vec::new(),
            furthest: None,
        }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.sig.get(self.pos).map(|&i| &self.tokens[i])
    }

    fn peek2(&self) -> Option<&'t Token> {
        self.sig.get(self.pos + 1).map(|&i| &self.tokens[i])
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.sig[self.pos]];
        self.pos += 1;
        t
    }

    fn error(&self, code: &'static str, message: impl Into<String>, span: SourceSpan) -> ParseError {
        ParseError { code, message: message.into(), span, at: self.pos, silent: false, related: Vec::new() }
    }

    /// Remember an error abandoned by backtracking.
    fn note(&mut self, e: ParseError) {
        let keep = match &self.furthest {
            Some(f) => e.at > f.at,
            None => true,
        };
        if keep {
            self.furthest = Some(e);
        }
    }

    /// Error for a token that cannot continue the term at this point.
    fn unexpected(&self, tok: Option<&'t Token>, expected: &str) -> ParseError {
        let Some(tok) = tok else {
            return match self.open.last() {
                Some(open) => self.unclosed(open, self.eof),
                None => self.error(codes::MISSING_END, "missing end of clause `.`", self.eof),
            };
        };
        match tok.kind {
            TokenKind::Invalid => ParseError { silent: true, ..self.error(codes::INVALID_TOKEN, "invalid token", tok.span) },
            TokenKind::End => match self.open.last() {
                Some(open) => self.unclosed(open, tok.span),
                None => self.error(codes::SYNTAX_ERROR, format!("unexpected end of clause, expected {expected}"), tok.span),
            },
            TokenKind::CloseParen | TokenKind::CloseBracket | TokenKind::CloseBrace => {
                let matching = self.open.last().is_some_and(|o| closes(o.kind, tok.kind));
                if matching {
                    self.error(codes::SYNTAX_ERROR, format!("unexpected {}, expected {expected}", describe(tok)), tok.span)
                } else {
                    self.error(codes::UNBALANCED_DELIMITER, format!("unbalanced {}", describe(tok)), tok.span)
                }
            }
            _ if self.is_operator_token(tok) => self.error(
                codes::OPERATOR_CLASH,
                format!("operator priority clash at {}", describe(tok)),
                tok.span,
            ),
            _ => self.error(codes::SYNTAX_ERROR, format!("unexpected {}, expected {expected}", describe(tok)), tok.span),
        }
    }

    fn unclosed(&self, open: &Token, at: SourceSpan) -> ParseError {
        let mut e = self.error(codes::UNBALANCED_DELIMITER, format!("unclosed `{}`", open.text), at);
        e.related.push((open.span, "opened here".into()));
        e
    }

    fn is_operator_token(&self, tok: &Token) -> bool {
        match tok.kind {
            TokenKind::Comma | TokenKind::Bar => true,
            k if k.is_atom() => tok
                .atom_name()
                .is_some_and(|n| self.ops.infix(&n).is_some() || self.ops.postfix(&n).is_some()),
            _ => false,
        }
    }

    fn sentence(&mut self) -> PResult<(Term, &'t Token)> {
        let result = self.parse(1200).and_then(|(mut term, _)| match self.peek() {
            Some(t) if t.kind == TokenKind::End => {
                self.bump();
                term.number_vars();
                Ok((term, t))
            }
            other => Err(self.unexpected(other, "operator or `.`")),
        });
        result.map_err(|e| pick(self.furthest.take(), e))
    }

    /// A complete term, optionally followed by a final end token.
    fn whole(&mut self) -> PResult<Term> {
        let result = self.parse(1200).and_then(|(mut term, _)| {
            if self.peek().is_some_and(|t| t.kind == TokenKind::End) {
                self.bump();
            }
            match self.peek() {
                None => {
                    term.number_vars();
                    Ok(term)
                }
                other => Err(self.unexpected(other, "operator or end of input")),
            }
        });
        result.map_err(|e| pick(self.furthest.take(), e))
    }

    fn parse(&mut self, max: u16) -> PResult<(Term, u16)> {
        let (left, pri) = self.primary(max)?;
        self.infix_loop(left, pri, max)
    }

    fn primary(&mut self, max: u16) -> PResult<(Term, u16)> {
        let Some(tok) = self.peek() else {
            return Err(self.unexpected(None, "a term"));
        };
        match tok.kind {
            TokenKind::Integer | TokenKind::Float => {
                self.bump();
                Ok((self.number(tok, false)?, 0))
            }
            TokenKind::Variable => {
                self.bump();
                if self.peek().is_some_and(|t| t.kind == TokenKind::OpenParenCT) {
                    return Err(self.error(codes::SYNTAX_ERROR, "a variable cannot be used as a functor", tok.span));
                }
                Ok((Term::new(TermKind::Var { name: tok.text.clone(), id: 0 }, tok.span), 0))
            }
            TokenKind::String => {
                self.bump();
                let text = lexer::unquote(&tok.text).map_err(|m| self.error(codes::SYNTAX_ERROR, m, tok.span))?;
                Ok((self.string_term(text, tok.span), 0))
            }
            TokenKind::OpenParen | TokenKind::OpenParenCT => {
                self.bump();
                self.open.push(tok);
                let (mut inner, _) = self.parse(1200)?;
                let close = self.expect_close(TokenKind::CloseParen, "`)`")?;
                inner.span = tok.span.cover(close.span);
                Ok((inner, 0))
            }
            TokenKind::OpenBracket => {
                self.bump();
                if let Some(close) = self.peek().filter(|t| t.kind == TokenKind::CloseBracket) {
                    self.bump();
                    return Ok((Term::new(TermKind::Atom("[]".into()), tok.span.cover(close.span)), 0));
                }
                self.open.push(tok);
                self.list(tok)
            }
            TokenKind::OpenBrace => {
                self.bump();
                if let Some(close) = self.peek().filter(|t| t.kind == TokenKind::CloseBrace) {
                    self.bump();
                    return Ok((Term::new(TermKind::Atom("{}".into()), tok.span.cover(close.span)), 0));
                }
                self.open.push(tok);
                let (inner, _) = self.parse(1200)?;
                let close = self.expect_close(TokenKind::CloseBrace, "`}`")?;
                let mut t = Term::new(TermKind::Curly(Box::new(inner)), tok.span.cover(close.span));
                t.functor_span = tok.span;
                Ok((t, 0))
            }
            k if k.is_atom() => self.atom_start(max),
            _ => Err(self.unexpected(Some(tok), "a term")),
        }
    }

    fn number(&self, tok: &Token, negate: bool) -> PResult<Term> {
        let value = lexer::parse_number(&tok.text).map_err(|m| self.error(codes::SYNTAX_ERROR, m, tok.span))?;
        let kind = match (value, negate) {
            (Number::Int(i), false) => TermKind::Int(i),
            (Number::Int(i), true) => TermKind::Int(-i),
            (Number::Float(f), false) => TermKind::Float(f),
            (Number::Float(f), true) => TermKind::Float(-f),
        };
        Ok(Term::new(kind, tok.span))
    }

    fn string_term(&self, text: String, span: SourceSpan) -> Term {
        let leaf = |kind| Term::new(kind, span);
        match self.dq {
            DoubleQuotes::Str => leaf(TermKind::Str(text)),
            DoubleQuotes::Atom => leaf(TermKind::Atom(text)),
            DoubleQuotes::Codes | DoubleQuotes::Chars if text.is_empty() => leaf(TermKind::Atom("[]".into())),
            DoubleQuotes::Codes => {
                let items = text.chars().map(|c| leaf(TermKind::Int(c as i64))).collect();
                leaf(TermKind::List { items, tail: None })
            }
            DoubleQuotes::Chars => {
                let items = text.chars().map(|c| leaf(TermKind::Atom(c.to_string()))).collect();
                leaf(TermKind::List { items, tail: None })
            }
        }
    }

    fn expect_close(&mut self, kind: TokenKind, what: &str) -> PResult<&'t Token> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.bump();
                self.open.pop();
                Ok(t)
            }
            other => Err(self.unexpected(other, &format!("operator or {what}"))),
        }
    }

    fn can_start_term(tok: &Token) -> bool {
        use TokenKind::*;
        matches!(
            tok.kind,
            NameAtom
                | QuotedAtom
                | SymbolAtom
                | SoloChar
                | Variable
                | Integer
                | Float
                | String
                | OpenParen
                | OpenParenCT
                | OpenBracket
                | OpenBrace
        )
    }

    fn atom_start(&mut self, max: u16) -> PResult<(Term, u16)> {
        let tok = self.bump();
        let name = tok
            .atom_name()
            .ok_or_else(|| self.error(codes::SYNTAX_ERROR, "malformed escape sequence in quoted atom", tok.span))?;
        let atom = Term::new(TermKind::Atom(name.clone()), tok.span);
        let next = self.peek();

        if tok.kind == TokenKind::SymbolAtom && name == "-" {
            if let Some(n) = next.filter(|n| matches!(n.kind, TokenKind::Integer | TokenKind::Float)) {
                if n.span.start == tok.span.end {
                    self.bump();
                    let mut t = self.number(n, true)?;
                    t.span = tok.span.cover(n.span);
                    t.functor_span = t.span;
                    return Ok((t, 0));
                }
            }
        }
        if next.is_some_and(|n| n.kind == TokenKind::OpenParenCT) {
            return self.compound(tok, name);
        }
        let Some(def) = self.ops.prefix(&name).cloned() else {
            return Ok((atom, 0));
        };
        let Some(next) = next.filter(|n| Self::can_start_term(n)) else {
            return Ok((atom, 0));
        };
        if next.kind.is_atom() && self.peek2().is_none_or(|t| t.kind != TokenKind::OpenParenCT) {
            if let Some(nn) = next.atom_name() {
                let infixish = self.ops.infix(&nn).is_some() || self.ops.postfix(&nn).is_some();
                let after_starts = self.peek2().is_some_and(Self::can_start_term);
                if infixish && self.ops.prefix(&nn).is_none() && after_starts {
                    return Ok((atom, 0));
                }
            }
        }
        if def.priority > max {
            return Err(self.error(
                codes::OPERATOR_CLASH,
                format!("prefix operator `{name}` has priority {} but at most {max} is allowed here", def.priority),
                tok.span,
            ));
        }
        let save = (self.pos, self.open.len());
        match self.parse(def.right_max()) {
            Ok((arg, _)) => {
                let span = tok.span.cover(arg.span);
                let mut t = Term::new(TermKind::Op { def: def.clone(), args: vec![arg] }, span);
                t.functor_span = tok.span;
                Ok((t, def.priority))
            }
            Err(e) => {
                self.note(e);
                self.pos = save.0;
                self.open.truncate(save.1);
                Ok((atom, 0))
            }
        }
    }

    fn compound(&mut self, functor: &'t Token, name: String) -> PResult<(Term, u16)> {
        let open = self.bump();
        self.open.push(open);
        let mut args = Vec::new();
        loop {
            let (arg, _) = self.parse(999)?;
            args.push(arg);
            match self.peek() {
                Some(t) if t.kind == TokenKind::Comma => {
                    self.bump();
                }
                Some(t) if t.kind == TokenKind::CloseParen => {
                    self.bump();
                    self.open.pop();
                    let mut term = Term::new(TermKind::Compound { functor: name, args }, functor.span.cover(t.span));
                    term.functor_span = functor.span;
                    return Ok((term, 0));
                }
                other => return Err(self.unexpected(other, "`,` or `)`")),
            }
        }
    }

    fn list(&mut self, open: &'t Token) -> PResult<(Term, u16)> {
        let mut items = Vec::new();
        let mut tail = None;
        loop {
            let (item, _) = self.parse(999)?;
            items.push(item);
            match self.peek() {
                Some(t) if t.kind == TokenKind::Comma => {
                    self.bump();
                }
                Some(t) if t.kind == TokenKind::Bar => {
                    self.bump();
                    let (t, _) = self.parse(999)?;
                    tail = Some(Box::new(t));
                    let close = self.expect_close(TokenKind::CloseBracket, "`]`")?;
                    return Ok((self.list_term(open, close, items, tail), 0));
                }
                Some(t) if t.kind == TokenKind::CloseBracket => {
                    self.bump();
                    self.open.pop();
                    return Ok((self.list_term(open, t, items, tail), 0));
                }
                other => return Err(self.unexpected(other, "`,`, `|` or `]`")),
            }
        }
    }

    fn list_term(&self, open: &Token, close: &Token, items: Vec<Term>, tail: Option<Box<Term>>) -> Term {
        let mut t = Term::new(TermKind::List { items, tail }, open.span.cover(close.span));
        t.functor_span = open.span;
        t
    }

    fn infix_loop(&mut self, mut left: Term, mut left_pri: u16, max: u16) -> PResult<(Term, u16)> {
        while let Some(tok) = self.peek() {
            let name = match tok.kind {
                TokenKind::Comma => ",".to_string(),
                TokenKind::Bar => "|".to_string(),
                k if k.is_atom() => match tok.atom_name() {
                    Some(n) => n,
                    None => break,
                },
                _ => break,
            };
            let infix = match tok.kind {
                TokenKind::Bar => Some(OperatorDef::new(1100, Fixity::Xfy, "|")),
                _ => self.ops.infix(&name).cloned(),
            };
            if let Some(def) = infix {
                if def.priority <= max && left_pri <= def.left_max() {
                    let save = (self.pos, self.open.len());
                    self.bump();
                    match self.parse(def.right_max()) {
                        Ok((right, _)) => {
                            let span = left.span.cover(right.span);
                            let mut t = Term::new(TermKind::Op { def: def.clone(), args: vec![left, right] }, span);
                            t.functor_span = tok.span;
                            left = t;
                            left_pri = def.priority;
                            continue;
                        }
                        Err(e) => {
                            self.note(e);
                            self.pos = save.0;
                            self.open.truncate(save.1);
                        }
                    }
                }
            }
            if let Some(def) = self.ops.postfix(&name).cloned() {
                if def.priority <= max && left_pri <= def.left_max() {
                    self.bump();
                    let span = left.span.cover(tok.span);
                    let mut t = Term::new(TermKind::Op { def: def.clone(), args: vec![left] }, span);
                    t.functor_span = tok.span;
                    left = t;
                    left_pri = def.priority;
                    continue;
                }
            }
            break;
        }
        Ok((left, left_pri))
    }
}

fn closes(open: TokenKind, close: TokenKind) -> bool {
    matches!(
        (open, close),
        (TokenKind::OpenParen | TokenKind::OpenParenCT, TokenKind::CloseParen)
            | (TokenKind::OpenBracket, TokenKind::CloseBracket)
            | (TokenKind::OpenBrace, TokenKind::CloseBrace)
    )
}

/// Read every sentence of `source` against a fixed database, without
/// executing directives. Useful for tooling that only needs syntax.
pub fn read_all(source: &str, db: &Database) -> (Vec<Sentence>, Vec<Diagnostic>) {
    let (tokens, mut diags) = lexer::tokenize(source, db.file);
    let mut reader = Reader::new(&tokens, db.file);
    let mut out = Vec::new();
    while let Some(r) = reader.read_sentence(db) {
        diags.extend(r.diagnostics);
        out.extend(r.sentence);
    }
    (out, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::OperatorDef;

    fn shape(src: &str) -> String {
        parse_term_text(src, &Database::default()).map(|t| t.shape().to_string()).unwrap_or_else(|d| format!("ERR {}", d.code))
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(shape("a + b * c"), "+(a,*(b,c))");
        assert_eq!(shape("a - b - c"), "-(-(a,b),c)");
        assert_eq!(shape("a :- b, c ; d -> e"), ":-(a,;(','(b,c),->(d,e)))");
        assert_eq!(shape("a = b = c"), "ERR operator_clash");
        assert_eq!(shape("2 ^ 3 ^ 4"), "^(2,^(3,4))");
    }

    #[test]
    fn comma_in_arguments_separates() {
        assert_eq!(shape("f(a, b)"), "f(a,b)");
        assert_eq!(shape("f((a, b))"), "f(','(a,b))");
        assert_eq!(shape("f(a :- b)"), "ERR operator_clash");
    }

    #[test]
    fn minus_adjacency() {
        assert_eq!(shape("- 1"), "-(1)");
        assert_eq!(shape("-1"), "-1");
        assert_eq!(shape("-(1)"), "-(1)");
        assert_eq!(shape("- (1)"), "-(1)");
        assert_eq!(shape("a - 1"), "-(a,1)");
        assert_eq!(shape("a-1"), "-(a,1)");
        assert_eq!(shape("a - -1"), "-(a,-1)");
        assert_eq!(shape("- 1.5"), "-(1.5)");
        assert_eq!(shape("-2.5"), "-2.5");
    }

    #[test]
    fn operator_atoms_as_operands() {
        assert_eq!(shape("X = +"), "=(_0,+)");
        assert_eq!(shape("f(-, +)"), "f(-,+)");
        assert_eq!(shape("- = a"), "=(-,a)");
        assert_eq!(shape("- - a"), "-(-(a))");
        assert_eq!(shape("\\+ =(a, b)"), "\\+(=(a,b))");
        assert_eq!(shape("[-]"), "'.'(-,[])");
        assert_eq!(shape("- (a, b)"), "-(','(a,b))");
        assert_eq!(shape("-(a, b)"), "-(a,b)");
    }

    #[test]
    fn lists_curly_strings() {
        assert_eq!(shape("[a, b | T]"), "'.'(a,'.'(b,_0))");
        assert_eq!(shape("{a, b}"), "{}(','(a,b))");
        assert_eq!(shape("[]"), "[]");
        assert_eq!(shape("'[]'"), "[]");
        assert_eq!(shape("\"ab\""), "\"ab\"");
        assert_eq!(shape("(a | b)"), "'|'(a,b)");
    }

    #[test]
    fn prefix_priority_limit() {
        assert_eq!(shape("a = \\+ b"), "ERR operator_clash");
        assert_eq!(shape("\\+ a = b"), "\\+(=(a,b))");
        assert_eq!(shape("- a * b"), "*(-(a),b)");
    }

    #[test]
    fn variables_numbered_per_sentence() {
        let t = parse_term_text("f(X, _, Y, X, _)", &Database::default()).unwrap();
        assert_eq!(t.shape().to_string(), "f(_0,_1,_2,_0,_3)");
        let ids: Vec<usize> = t
            .args()
            .iter()
            .map(|a| match a.kind {
                TermKind::Var { id, .. } => id,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(ids, [0, 1, 2, 0, 3]);
    }

    #[test]
    fn spans_enclose_children() {
        let t = parse_term_text("foo(bar, [1, 2]) + 3", &Database::default()).unwrap();
        fn check(t: &Term) {
            t.args().iter().for_each(|c| {
                assert!(t.span.encloses(&c.span));
                check(c);
            });
        }
        check(&t);
        assert_eq!(t.functor_span.start, 17);
    }

    fn kinds(src: &str, db: &Database) -> (Vec<SentenceKind>, Vec<&'static str>) {
        let (sents, diags) = read_all(src, db);
        (sents.iter().map(|s| s.kind).collect(), diags.iter().map(|d| d.code).collect())
    }

    #[test]
    fn sentence_kinds() {
        let db = Database::default();
        assert_eq!(kinds("foo.", &db).0, [SentenceKind::Fact]);
        assert_eq!(kinds("h --> a, b.", &db).0, [SentenceKind::DcgRule]);
        assert_eq!(kinds(":- dynamic foo/1.", &db).0, [SentenceKind::Directive]);
        assert_eq!(kinds("a :- b.", &db).0, [SentenceKind::Clause]);
    }

    #[test]
    fn recovery_drops_to_end() {
        let db = Database::default();
        let (k, d) = kinds("foo(. bar.", &db);
        assert_eq!(k, [SentenceKind::Fact]);
        assert_eq!(d, [codes::UNBALANCED_DELIMITER]);
        let (sents, diags) = read_all("a(. b(. c.", &db);
        assert_eq!(diags.len(), 2);
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].term.shape().to_string(), "c");
    }

    #[test]
    fn error_codes() {
        let db = Database::default();
        assert_eq!(kinds("foo", &db).1, [codes::MISSING_END]);
        assert_eq!(kinds("a === b.", &db).1, [codes::SYNTAX_ERROR]);
        assert_eq!(kinds("a).", &db).1, [codes::UNBALANCED_DELIMITER]);
        assert_eq!(kinds("f(a].", &db).1, [codes::UNBALANCED_DELIMITER]);
        assert_eq!(kinds("a :- b :- c.", &db).1, [codes::OPERATOR_CLASH]);
        // the lexer reports the bad token; the reader adds nothing
        assert_eq!(kinds("a ` b.", &db).1, [codes::INVALID_TOKEN]);
    }

    #[test]
    fn operator_table_is_consulted_per_call() {
        let mut db = Database::default();
        let (tokens, _) = lexer::tokenize("a xor b. a xor b.", FileId(0));
        let mut reader = Reader::new(&tokens, FileId(0));
        let first = reader.read_sentence(&db).unwrap();
        assert!(first.sentence.is_none());
        db.add_operator(OperatorDef::new(500, Fixity::Yfx, "xor")).unwrap();
        let second = reader.read_sentence(&db).unwrap();
        assert_eq!(second.sentence.unwrap().term.shape().to_string(), "xor(a,b)");
    }

    #[test]
    fn leading_comments_are_attached() {
        let (sents, _) = read_all("% one\n/* two */ a. % three\nb.", &Database::default());
        assert_eq!(sents[0].leading_comments.len(), 2);
        assert_eq!(sents[1].leading_comments.len(), 1);
        assert_eq!(sents[1].leading_comments[0].text, "% three");
    }

    #[test]
    fn double_quotes_flag() {
        let mut db = Database::default();
        db.flags.insert("double_quotes".into(), "codes".into());
        assert_eq!(parse_term_text("\"ab\"", &db).unwrap().shape().to_string(), "'.'(97,'.'(98,[]))");
        db.flags.insert("double_quotes".into(), "atom".into());
        assert_eq!(parse_term_text("\"ab\"", &db).unwrap().shape().to_string(), "ab");
    }
}
