use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use html_escape::{encode_double_quoted_attribute as attr, encode_text as text};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{DocBlock, DocTarget};
use crate::database::{ImportRecord, PredicateIndicator, Resolution};
use crate::printer::print_with_fresh_vars;
use crate::workspace::{FileIndex, ProjectModel};

pub const STYLESHEET: &str = include_str!("style.css");

const ANCHOR_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'_').remove(b'-').remove(b'.');

/// Anchor id of a predicate section: `pred-<name>-<arity>` with the name
/// percent-encoded.
pub fn anchor(pi: &PredicateIndicator) -> String {
    format!("pred-{}-{}", utf8_percent_encode(&pi.name, ANCHOR_SET), pi.arity)
}

/// Output file for a source path: extension dropped, `/` turned into `.`.
pub fn page_name(path: &str) -> String {
    let stem = match path.rsplit_once('.') {
        Some((stem, ext)) if !ext.contains('/') && !stem.is_empty() && !stem.ends_with('/') => stem,
        _ => path,
    };
    let stem = stem.replace('/', ".");
    if stem == "index" {
        "index.pl.html".to_string()
    } else {
        format!("{stem}.html")
    }
}

/// Every output file by name. Rendering is a pure function of the model.
pub fn render_site(model: &ProjectModel) -> BTreeMap<String, String> {
    let mut site = BTreeMap::new();
    site.insert("style.css".to_string(), STYLESHEET.to_string());
    site.insert("index.html".to_string(), index_page(model));
    for index in &model.indices {
        site.insert(page_name(&index.path), file_page(model, index));
    }
    site
}

/// Write the site into `out`, creating it if needed. Returns the written
/// paths in name order.
pub fn generate_html(model: &ProjectModel, out: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for (name, content) in render_site(model) {
        let path = out.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}

fn head(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n\
         <link rel=\"stylesheet\" href=\"style.css\">\n</head>\n<body>\n",
        text(title)
    );
}

fn doc_list(out: &mut String, block: &DocBlock) {
    out.push_str("<dl class=\"doc\">\n");
    for (tag, body) in &block.entries {
        let _ = writeln!(out, "<dt>{}</dt><dd>{}</dd>", text(tag), text(body));
    }
    out.push_str("</dl>\n");
}

fn title_of(index: &FileIndex) -> String {
    match &index.module {
        Some(m) => format!("module {}", m.name),
        None => index.path.clone(),
    }
}

fn index_page(model: &ProjectModel) -> String {
    let mut out = String::new();
    head(&mut out, "Project summary");
    out.push_str("<h1>Project summary</h1>\n");
    if model.indices.is_empty() {
        out.push_str("<p>No source files.</p>\n");
    } else {
        out.push_str("<table>\n<tr><th>File</th><th>Module</th><th>Predicates</th></tr>\n");
        for index in &model.indices {
            let module = index.module.as_ref().map(|m| m.name.as_str()).unwrap_or("");
            let _ = writeln!(
                out,
                "<tr><td><a href=\"{}\">{}</a></td><td>{}</td><td>{}</td></tr>",
                attr(&page_name(&index.path)),
                text(&index.path),
                text(module),
                index.defined.len()
            );
        }
        out.push_str("</table>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

fn import_item(model: &ProjectModel, record: &ImportRecord) -> String {
    let directive = format!("{}({})", record.kind.directive_name(), record.target);
    let target = match &record.resolution {
        Resolution::Project(path) if model.index(path).is_some() => {
            format!("<a href=\"{}\">{}</a>", attr(&page_name(path)), text(path))
        }
        Resolution::Project(path) => text(path).into_owned(),
        Resolution::Catalog(lib) => format!("standard library <code>{}</code>", text(lib)),
        Resolution::External { path, .. } => format!("{} (outside the project)", text(&path.to_string_lossy())),
        Resolution::Unresolved => "<span class=\"unresolved\">unresolved import</span>".to_string(),
    };
    format!("<li><code>{}</code>: {target}</li>\n", text(&directive))
}

fn file_page(model: &ProjectModel, index: &FileIndex) -> String {
    let file = model.file(&index.path).expect("indexed file");
    let mut out = String::new();
    let title = title_of(index);
    head(&mut out, &title);
    out.push_str("<p class=\"nav\"><a href=\"index.html\">Project summary</a></p>\n");
    let _ = writeln!(out, "<h1>{}</h1>\n<p class=\"path\">{}</p>", text(&title), text(&index.path));
    if let Some(m) = &index.module {
        if let Some(block) = index.doc(&DocTarget::Module(m.name.clone())) {
            doc_list(&mut out, block);
        }
    }

    if !index.imports.is_empty() {
        out.push_str("<h2>Imports</h2>\n<ul>\n");
        for record in &index.imports {
            out.push_str(&import_item(model, record));
        }
        out.push_str("</ul>\n");
    }

    out.push_str("<h2>Predicates</h2>\n");
    let synopses: Vec<(String, String)> = index
        .defined
        .values()
        .map(|def| {
            let head = file.sentences[def.first_sentence].head().expect("defining sentence");
            (def.label(), print_with_fresh_vars(head, &file.db.ops))
        })
        .collect();
    if index.defined.is_empty() {
        out.push_str("<p>No predicates.</p>\n");
    } else {
        out.push_str("<table class=\"predicates\">\n<tr><th>Predicate</th><th>Synopsis</th><th>Visibility</th></tr>\n");
        for (def, (label, synopsis)) in index.defined.values().zip(&synopses) {
            let visibility = if index.module.is_none() || index.exports(&def.indicator) { "exported" } else { "private" };
            let _ = writeln!(
                out,
                "<tr><td><a href=\"#{}\">{}</a></td><td><code>{}</code></td><td>{visibility}</td></tr>",
                attr(&anchor(&def.indicator)),
                text(label),
                text(synopsis)
            );
        }
        out.push_str("</table>\n");
    }

    for (def, (label, synopsis)) in index.defined.values().zip(&synopses) {
        let _ = writeln!(
            out,
            "<section id=\"{}\">\n<h3>{}</h3>\n<pre>{}</pre>",
            attr(&anchor(&def.indicator)),
            text(label),
            text(synopsis)
        );
        if let Some(block) = index.doc(&DocTarget::Predicate(def.indicator.clone())) {
            doc_list(&mut out, block);
        }
        out.push_str("</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workspace::{build_from_sources, Config};

    fn model(files: &[(&str, &str)]) -> ProjectModel {
        build_from_sources(files.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect(), &Config::default())
    }

    #[test]
    fn page_and_anchor_names() {
        assert_eq!(page_name("a.pl"), "a.html");
        assert_eq!(page_name("sub/b.pl"), "sub.b.html");
        assert_eq!(page_name("index.pl"), "index.pl.html");
        assert_eq!(page_name("noext"), "noext.html");
        assert_eq!(anchor(&PredicateIndicator::new("===", 2)), "pred-%3D%3D%3D-2");
        assert_eq!(anchor(&PredicateIndicator::new("is_ok", 1)), "pred-is_ok-1");
    }

    #[test]
    fn empty_project_has_index_only() {
        let site = render_site(&model(&[]));
        assert_eq!(site.keys().collect::<Vec<_>>(), ["index.html", "style.css"]);
    }

    #[test]
    fn pages_link_imports_and_list_predicates() {
        let m = model(&[
            ("a.pl", ":- use_module(b).\n:- use_module(missing).\n%% Author: Ann\nmain :- f(1).\n"),
            ("b.pl", ":- module(b, [f/1]).\nf(X) :- X > 0.\n"),
        ]);
        let site = render_site(&m);
        let a = &site["a.html"];
        assert!(a.contains("<a href=\"b.html\">b.pl</a>"));
        assert!(a.contains("unresolved import"));
        assert!(a.contains("<dt>Author:</dt><dd>Ann</dd>"));
        assert!(site["b.html"].contains("<a href=\"#pred-f-1\">f/1</a></td><td><code>f(A)</code>"));
        assert_eq!(render_site(&m), site);
    }
}
