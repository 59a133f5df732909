use std::io::{self, BufRead, Write};

use super::directive::exec;
use super::loader::Loader;
use super::solve::{solve, SolveLimits};
use crate::database::Database;
use crate::lexer::{self, TokenKind};
use crate::printer::pretty_print;
use crate::reader::{Reader, SentenceKind};

/// Interactive read-eval loop. Goals end with `.`; after each solution
/// that may have alternatives a line is read, and `;` asks for the next.
/// Returns at end of input.
pub fn repl(db: &mut Database, loader: &mut dyn Loader, input: &mut dyn BufRead, output: &mut dyn Write) -> io::Result<()> {
    let mut buffer = String::new();
    loop {
        if buffer.trim().is_empty() {
            write!(output, "?- ")?;
            output.flush()?;
        }
        let mut line = String::new();
        let eof = input.read_line(&mut line)? == 0;
        buffer.push_str(&line);
        if !eof && !ends_sentence(&buffer, db) {
            continue;
        }
        let text = std::mem::take(&mut buffer);
        if !text.trim().is_empty() {
            run_text(&text, db, loader, input, output)?;
        }
        if eof {
            writeln!(output)?;
            return Ok(());
        }
    }
}

fn ends_sentence(text: &str, db: &Database) -> bool {
    let (tokens, _) = lexer::tokenize(text, db.file);
    tokens.iter().rev().find(|t| !t.kind.is_trivia()).is_some_and(|t| t.kind == TokenKind::End)
}

fn run_text(
    text: &str,
    db: &mut Database,
    loader: &mut dyn Loader,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> io::Result<()> {
    let (tokens, lex_diags) = lexer::tokenize(text, db.file);
    for d in lex_diags {
        writeln!(output, "syntax error: {}", d.message)?;
    }
    let mut reader = Reader::new(&tokens, db.file);
    while let Some(result) = reader.read_sentence(db) {
        for d in &result.diagnostics {
            writeln!(output, "syntax error: {}", d.message)?;
        }
        let Some(sentence) = result.sentence else { continue };
        if sentence.kind == SentenceKind::Directive {
            let diags = exec(sentence.goal().expect("directive goal"), sentence.span, db, loader);
            for d in &diags {
                writeln!(output, "{}: {}", d.severity.as_str(), d.message)?;
            }
            if !diags.iter().any(|d| d.is_error()) {
                writeln!(output, "true.")?;
            }
            continue;
        }
        answer(&sentence.term, db, input, output)?;
    }
    Ok(())
}

fn answer(goal: &crate::term::Term, db: &Database, input: &mut dyn BufRead, output: &mut dyn Write) -> io::Result<()> {
    let mut solutions = solve(goal, db, SolveLimits::default());
    let mut warned = 0;
    loop {
        let next = solutions.next();
        for w in &solutions.warnings()[warned..] {
            writeln!(output, "warning: {w}")?;
        }
        warned = solutions.warnings().len();
        match next {
            None => {
                writeln!(output, "false.")?;
                return Ok(());
            }
            Some(Err(e)) => {
                writeln!(output, "error: {e}")?;
                return Ok(());
            }
            Some(Ok(binding)) => {
                for (name, value) in &binding.vars {
                    writeln!(output, "{name} = {}", pretty_print(value, &db.ops))?;
                }
                if !solutions.has_more() {
                    writeln!(output, "true.")?;
                    return Ok(());
                }
                write!(output, "more? ")?;
                output.flush()?;
                let mut reply = String::new();
                input.read_line(&mut reply)?;
                if reply.trim() != ";" {
                    writeln!(output, "true.")?;
                    return Ok(());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{consult, EngineChain, NoLoader};

    fn session(program: &str, input: &str) -> String {
        let mut db = Database::default();
        consult(program, &mut db, &mut EngineChain::standard(), &mut NoLoader);
        let mut out = Vec::new();
        repl(&mut db, &mut NoLoader, &mut input.as_bytes(), &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn deterministic_answer() {
        assert_eq!(session("", "X = 1.\n"), "?- X = 1\ntrue.\n?- \n");
    }

    #[test]
    fn semicolon_asks_for_more() {
        let out = session("p(1). p(2). p(3).", "p(X).\n;\n\n");
        assert_eq!(out, "?- X = 1\nmore? X = 2\nmore? true.\n?- \n");
        let out = session("p(1). p(2).", "p(X).\n;\n");
        assert_eq!(out, "?- X = 1\nmore? X = 2\ntrue.\n?- \n");
        assert_eq!(session("p(1).", "p(2).\n"), "?- false.\n?- \n");
    }

    #[test]
    fn directives_change_the_grammar() {
        let out = session("", ":- op(9, xf, bang). 3 bang = Y.\n");
        assert_eq!(out, "?- true.\nY = 3 bang\ntrue.\n?- \n");
    }

    #[test]
    fn parse_errors_do_not_end_the_session() {
        let out = session("", "nonsense(.\nX = 2.\n");
        assert!(out.starts_with("?- syntax error: "), "{out}");
        assert!(out.ends_with("?- X = 2\ntrue.\n?- \n"), "{out}");
    }

    #[test]
    fn goals_may_span_lines() {
        assert_eq!(session("", "X =\n  1.\n"), "?- X = 1\ntrue.\n?- \n");
    }
}
