//! PrologDoc: comment fields with `Tag:` entries above predicates and
//! modules, and a static HTML summary of a project.

mod extract;
mod html;

pub use extract::{extract_docs, parse_entries, DocBlock, DocTarget, DEFAULT_TAGS};
pub use html::{anchor, generate_html, page_name, render_site, STYLESHEET};
