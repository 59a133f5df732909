use std::io::{self, Write};

use pldev_core::workspace::{CompletionItem, HoverInfo, OutlineItem, ProjectModel, TextEdit};
use pldev_core::{Diagnostic, SourceSpan};

/// Backslash-escape the characters that would break a tab-separated record.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn span_fields(s: &SourceSpan) -> String {
    format!("{}\t{}\t{}\t{}", s.start_line, s.start_col, s.end_line, s.end_col)
}

/// file, start_line, start_col, end_line, end_col, severity, code, message
pub fn diagnostic_record(model: &ProjectModel, d: &Diagnostic) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        escape(model.path_of(d.span.file)),
        span_fields(&d.span),
        d.severity.as_str(),
        d.code,
        escape(&d.message)
    )
}

pub fn diagnostic_human(model: &ProjectModel, d: &Diagnostic) -> String {
    let mut s = format!(
        "{}:{}:{}: {}: {} [{}]",
        model.path_of(d.span.file),
        d.span.start_line,
        d.span.start_col,
        d.severity.as_str(),
        d.message,
        d.code
    );
    for (span, note) in &d.related {
        s.push_str(&format!("\n  {}:{}:{}: note: {note}", model.path_of(span.file), span.start_line, span.start_col));
    }
    s
}

pub fn outline(out: &mut dyn Write, path: &str, items: &[OutlineItem], machine: bool) -> io::Result<()> {
    for item in items {
        if machine {
            writeln!(out, "{}\t{}\t{}\t{}", escape(path), span_fields(&item.target_span), item.kind.as_str(), escape(&item.label))?;
        } else {
            writeln!(
                out,
                "{:>4}:{:<3} {:<9} {}",
                item.target_span.start_line,
                item.target_span.start_col,
                item.kind.as_str(),
                item.label
            )?;
        }
    }
    Ok(())
}

pub fn hover(out: &mut dyn Write, path: &str, info: &HoverInfo, machine: bool) -> io::Result<()> {
    if machine {
        writeln!(out, "{}\t{}\t{}", escape(path), span_fields(&info.span), escape(&info.text))
    } else {
        writeln!(out, "{}", info.text)
    }
}

pub fn completions(out: &mut dyn Write, items: &[CompletionItem], machine: bool) -> io::Result<()> {
    for i in items {
        if machine {
            writeln!(out, "{}\t{}\t{}\t{}", escape(&i.label), i.kind.as_str(), escape(&i.insert_text), escape(&i.synopsis))?;
        } else {
            writeln!(out, "{:<24} {:<9} {}", i.label, i.kind.as_str(), i.synopsis)?;
        }
    }
    Ok(())
}

/// One line per edit: where it applies and what it inserts.
pub fn edit(out: &mut dyn Write, model: &ProjectModel, e: &TextEdit, machine: bool) -> io::Result<()> {
    let file = model.file(&e.path).expect("edit targets a project file");
    let span = file.span(e.start, e.end);
    if machine {
        writeln!(out, "{}\t{}\t{}\t{}", escape(&e.path), span_fields(&span), escape(&e.expected), escape(&e.replacement))
    } else if e.start == e.end {
        writeln!(out, "  {}:{}:{}: insert {:?}", e.path, span.start_line, span.start_col, e.replacement)
    } else {
        writeln!(out, "  {}:{}:{}: replace {:?} with {:?}", e.path, span.start_line, span.start_col, e.expected, e.replacement)
    }
}
