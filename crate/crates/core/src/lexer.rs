//! Lossless tokenizer.
//!
//! Every byte of the input ends up in exactly one token, including layout
//! and comments, so joining the token texts reproduces the source. Lexing
//! does not look at the operator table; [`classify`] does that at the point
//! where the reader consumes a token.

use crate::diag::{codes, Diagnostic};
use crate::ops::OperatorTable;
use crate::span::{FileId, LineIndex, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    NameAtom,
    QuotedAtom,
    SymbolAtom,
    SoloChar,
    Variable,
    Integer,
    Float,
    String,
    OpenParen,
    /// `(` directly after an atom or variable, with no layout in between.
    OpenParenCT,
    CloseParen,
    OpenBracket,
    CloseBracket,
    OpenBrace,
    CloseBrace,
    Comma,
    Bar,
    /// The clause terminator: `.` followed by layout, `%` or end of input.
    End,
    LineComment,
    BlockComment,
    Layout,
    Invalid,
}

impl TokenKind {
    pub fn is_atom(self) -> bool {
        matches!(
            self,
            TokenKind::NameAtom | TokenKind::QuotedAtom | TokenKind::SymbolAtom | TokenKind::SoloChar
        )
    }

    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Layout | TokenKind::LineComment | TokenKind::BlockComment)
    }

    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::LineComment | TokenKind::BlockComment)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

impl Token {
    /// The atom this token denotes, with quotes and escapes resolved.
    /// `None` for tokens that are not atoms or whose escapes are malformed.
    pub fn atom_name(&self) -> Option<String> {
        match self.kind {
            TokenKind::NameAtom | TokenKind::SymbolAtom | TokenKind::SoloChar => Some(self.text.clone()),
            TokenKind::QuotedAtom => unquote(&self.text).ok(),
            TokenKind::Comma => Some(",".into()),
            TokenKind::Bar => Some("|".into()),
            _ => None,
        }
    }
}

/// How the reader may use an atom token under the current operator table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenRole {
    Operand,
    PrefixOp,
    InfixOp,
    PostfixOp,
    /// Both a prefix and an infix/postfix definition exist; the reader
    /// decides from context.
    Ambiguous,
}

pub fn classify(token: &Token, table: &OperatorTable) -> TokenRole {
    let name = match token.kind {
        TokenKind::Comma => return TokenRole::InfixOp,
        k if k.is_atom() => match token.atom_name() {
            Some(name) => name,
            None => return TokenRole::Operand,
        },
        _ => return TokenRole::Operand,
    };
    let prefix = table.prefix(&name).is_some();
    let infix = table.infix(&name).is_some();
    let postfix = table.postfix(&name).is_some();
    match (prefix, infix || postfix) {
        (true, true) => TokenRole::Ambiguous,
        (true, false) => TokenRole::PrefixOp,
        (false, true) if infix => TokenRole::InfixOp,
        (false, true) => TokenRole::PostfixOp,
        (false, false) => TokenRole::Operand,
    }
}

pub fn is_symbol_char(c: char) -> bool {
    matches!(
        c,
        '+' | '-' | '*' | '/' | '\\' | '^' | '<' | '>' | '=' | '~' | ':' | '.' | '?' | '@' | '#' | '&' | '$'
    )
}

pub fn is_alnum(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn is_var_start(c: char) -> bool {
    c == '_' || c.is_uppercase()
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() && !c.is_uppercase()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    file: FileId,
    lines: LineIndex,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

pub fn tokenize(source: &str, file: FileId) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        src: source,
        pos: 0,
        file,
        lines: LineIndex::new(source),
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    (lx.tokens, lx.diags)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump_while(&mut self, start: usize, f: impl Fn(char) -> bool) -> usize {
        let len: usize = self.src[start..].chars().take_while(|&c| f(c)).map(char::len_utf8).sum();
        start + len
    }

    fn push(&mut self, kind: TokenKind, end: usize) {
        let span = self.lines.span(self.src, self.file, self.pos, end);
        self.tokens.push(Token { kind, text: self.src[self.pos..end].to_string(), span });
        self.pos = end;
    }

    fn invalid(&mut self, end: usize, message: impl Into<String>) {
        let span = self.lines.span(self.src, self.file, self.pos, end);
        self.diags.push(Diagnostic::error(codes::INVALID_TOKEN, message, span));
        self.push(TokenKind::Invalid, end);
    }

    fn prev_allows_ct(&self) -> bool {
        match self.tokens.last() {
            Some(t) => {
                t.kind.is_atom() && t.span.end == self.pos || t.kind == TokenKind::Variable && t.span.end == self.pos
            }
            None => false,
        }
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                c if c.is_whitespace() => {
                    let end = self.bump_while(start, char::is_whitespace);
                    self.push(TokenKind::Layout, end);
                }
                '%' => {
                    let end = self.bump_while(start, |c| c != '\n');
                    self.push(TokenKind::LineComment, end);
                }
                '/' if self.peek_at(1) == Some('*') => match self.rest()[2..].find("*/") {
                    Some(i) => self.push(TokenKind::BlockComment, start + 2 + i + 2),
                    None => self.invalid(self.src.len(), "unterminated block comment"),
                },
                '0' if self.peek_at(1) == Some('\'') => self.char_code(),
                c if c.is_ascii_digit() => self.number(),
                c if is_var_start(c) => {
                    let end = self.bump_while(start, is_alnum);
                    self.push(TokenKind::Variable, end);
                }
                c if is_name_start(c) => {
                    let end = self.bump_while(start, is_alnum);
                    self.push(TokenKind::NameAtom, end);
                }
                '.' if matches!(self.peek_at(1), None | Some('%')) || self.peek_at(1).is_some_and(char::is_whitespace) => {
                    self.push(TokenKind::End, start + 1);
                }
                c if is_symbol_char(c) => {
                    let end = self.bump_while(start, is_symbol_char);
                    self.push(TokenKind::SymbolAtom, end);
                }
                '!' | ';' => self.push(TokenKind::SoloChar, start + 1),
                '\'' => self.quoted('\'', TokenKind::QuotedAtom, "quoted atom"),
                '"' => self.quoted('"', TokenKind::String, "string"),
                '`' => {
                    let end = match self.rest()[1..].find('`') {
                        Some(i) => start + 1 + i + 1,
                        None => self.src.len(),
                    };
                    self.invalid(end, "back-quoted strings are not supported");
                }
                '(' => {
                    let kind = if self.prev_allows_ct() { TokenKind::OpenParenCT } else { TokenKind::OpenParen };
                    self.push(kind, start + 1);
                }
                ')' => self.push(TokenKind::CloseParen, start + 1),
                '[' => self.push(TokenKind::OpenBracket, start + 1),
                ']' => self.push(TokenKind::CloseBracket, start + 1),
                '{' => self.push(TokenKind::OpenBrace, start + 1),
                '}' => self.push(TokenKind::CloseBrace, start + 1),
                ',' => self.push(TokenKind::Comma, start + 1),
                '|' => self.push(TokenKind::Bar, start + 1),
                c => self.invalid(start + c.len_utf8(), format!("unexpected character {c:?}")),
            }
        }
    }

    fn quoted(&mut self, quote: char, kind: TokenKind, what: &str) {
        let bytes = self.src.as_bytes();
        let q = quote as u8;
        let mut i = self.pos + 1;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => i += escape_len(&self.src[i..]).unwrap_or(2),
                b if b == q => {
                    if bytes.get(i + 1) == Some(&q) {
                        i += 2;
                    } else {
                        // `i + 1` is a char boundary: the quote is ASCII.
                        self.push(kind, i + 1);
                        return;
                    }
                }
                _ => i += 1,
            }
        }
        self.invalid(self.src.len(), format!("unterminated {what}"));
    }

    fn char_code(&mut self) {
        let start = self.pos;
        let body = &self.src[start + 2..];
        let end = if body.starts_with("''") {
            Some(start + 4)
        } else if body.starts_with('\\') {
            escape_len(body).map(|n| start + 2 + n)
        } else {
            body.chars().next().filter(|c| *c != '\n').map(|c| start + 2 + c.len_utf8())
        };
        match end {
            Some(end) => self.push(TokenKind::Integer, end),
            None => self.invalid(start + 2, "incomplete character code literal"),
        }
    }

    fn number(&mut self) {
        let start = self.pos;
        let rest = self.rest();
        let radix = match rest.get(..2) {
            Some("0x") => Some(16),
            Some("0o") => Some(8),
            Some("0b") => Some(2),
            _ => None,
        };
        if let Some(radix) = radix {
            if rest[2..].chars().next().is_some_and(|c| c.is_digit(radix)) {
                let end = self.bump_while(start + 2, |c| c.is_digit(radix));
                self.push(TokenKind::Integer, end);
                return;
            }
        }
        let mut end = self.bump_while(start, |c| c.is_ascii_digit());
        let mut kind = TokenKind::Integer;
        let after = &self.src[end..];
        if after.starts_with('.') && after[1..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
            end = self.bump_while(end + 1, |c| c.is_ascii_digit());
            kind = TokenKind::Float;
            let exp = &self.src[end..];
            let mut chars = exp.chars();
            if matches!(chars.next(), Some('e' | 'E')) {
                let mut skip = 1;
                let mut next = chars.next();
                if matches!(next, Some('+' | '-')) {
                    skip += 1;
                    next = chars.next();
                }
                if next.is_some_and(|c| c.is_ascii_digit()) {
                    end = self.bump_while(end + skip, |c| c.is_ascii_digit());
                }
            }
        }
        self.push(kind, end);
    }
}

/// Length in bytes of the escape sequence at the start of `s` (which begins
/// with a backslash), or `None` when it is malformed.
fn escape_len(s: &str) -> Option<usize> {
    let mut chars = s.char_indices().skip(1);
    let (_, c) = chars.next()?;
    match c {
        'x' => {
            let close = s[2..].find('\\')?;
            let digits = &s[2..2 + close];
            (!digits.is_empty() && digits.chars().all(|c| c.is_ascii_hexdigit())).then_some(2 + close + 1)
        }
        '0'..='7' => {
            let close = s[1..].find('\\')?;
            let digits = &s[1..1 + close];
            digits.chars().all(|c| c.is_digit(8)).then_some(1 + close + 1)
        }
        c => Some(1 + c.len_utf8()),
    }
}

fn decode_escape(s: &str) -> Result<(Option<char>, usize), String> {
    let len = escape_len(s).ok_or_else(|| format!("malformed escape sequence in {s:?}"))?;
    let c = s[1..].chars().next().unwrap_or('\\');
    let value = match c {
        'a' => Some('\u{7}'),
        'b' => Some('\u{8}'),
        'f' => Some('\u{c}'),
        'n' => Some('\n'),
        'r' => Some('\r'),
        't' => Some('\t'),
        'v' => Some('\u{b}'),
        'e' => Some('\u{1b}'),
        's' => Some(' '),
        'z' => return Err("unsupported escape \\z".into()),
        '\\' | '\'' | '"' | '`' => Some(c),
        '\n' => None,
        'x' => {
            let code = u32::from_str_radix(&s[2..len - 1], 16).map_err(|e| e.to_string())?;
            Some(char::from_u32(code).ok_or("escape is not a valid character")?)
        }
        '0'..='7' => {
            let code = u32::from_str_radix(&s[1..len - 1], 8).map_err(|e| e.to_string())?;
            Some(char::from_u32(code).ok_or("escape is not a valid character")?)
        }
        other => return Err(format!("unknown escape \\{other}")),
    };
    Ok((value, len))
}

/// Resolve quotes and escapes of a quoted atom or string token text.
pub fn unquote(text: &str) -> Result<String, String> {
    let quote = text.chars().next().ok_or("empty literal")?;
    let inner = text
        .strip_prefix(quote)
        .and_then(|t| t.strip_suffix(quote))
        .ok_or("unterminated literal")?;
    let mut out = String::with_capacity(inner.len());
    let mut i = 0;
    while i < inner.len() {
        let rest = &inner[i..];
        let c = rest.chars().next().unwrap();
        if c == '\\' {
            let (value, len) = decode_escape(rest)?;
            out.extend(value);
            i += len;
        } else if c == quote {
            // doubled quote
            out.push(quote);
            i += 2;
        } else {
            out.push(c);
            i += c.len_utf8();
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Int(i64),
    Float(f64),
}

/// Value of an Integer or Float token text.
pub fn parse_number(text: &str) -> Result<Number, String> {
    if let Some(body) = text.strip_prefix("0'") {
        let code = if body == "''" {
            '\'' as i64
        } else if body.starts_with('\\') {
            match decode_escape(body)? {
                (Some(c), _) => c as i64,
                (None, _) => return Err("line continuation is not a character".into()),
            }
        } else {
            body.chars().next().ok_or("empty character code")? as i64
        };
        return Ok(Number::Int(code));
    }
    let radix = match text.get(..2) {
        Some("0x") => 16,
        Some("0o") => 8,
        Some("0b") => 2,
        _ => 10,
    };
    if radix != 10 {
        return i64::from_str_radix(&text[2..], radix)
            .map(Number::Int)
            .map_err(|_| format!("integer {text} is out of range"));
    }
    if text.contains(['.', 'e', 'E']) {
        text.parse::<f64>().map(Number::Float).map_err(|e| e.to_string())
    } else {
        text.parse::<i64>().map(Number::Int).map_err(|_| format!("integer {text} is out of range"))
    }
}
