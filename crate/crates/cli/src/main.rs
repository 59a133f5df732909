//! `pldev`: check, browse and document a Prolog project from the shell.
//!
//! Exit status is 0 on success, 1 when `check` (or a re-check after
//! `fix --apply`) finds errors, and 2 when the tool itself cannot do what
//! was asked.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "pldev", version, about = "Prolog project checker, browser and doc generator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// human or machine (tab-separated records).
    #[arg(long, global = true, value_parser = ["human", "machine"])]
    pub format: Option<String>,
    /// Library search directory; repeatable.
    #[arg(long = "lib", global = true, value_name = "PATH")]
    pub libs: Vec<PathBuf>,
    /// Source file pattern relative to the root; repeatable.
    #[arg(long = "glob", global = true, value_name = "PATTERN")]
    pub globs: Vec<String>,
    /// Project root for file-level commands (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub root: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report every diagnostic of the project.
    Check {
        /// Project directory (default: --root or the current directory).
        path: Option<PathBuf>,
    },
    /// Modules, imports and predicates of one file.
    Outline { file: PathBuf },
    /// What is defined at a 1-based line and column.
    Hover {
        file: PathBuf,
        line: u32,
        col: u32,
        /// Show PrologDoc entries instead of the definition.
        #[arg(long)]
        doc: bool,
    },
    /// Completion proposals for the word ending at a line and column.
    Complete { file: PathBuf, line: u32, col: u32 },
    /// List or apply quick fixes for one diagnostic.
    Fix {
        /// Project directory (default: --root or the current directory).
        path: Option<PathBuf>,
        /// FILE:LINE[:COL] of the diagnostic's start.
        #[arg(long, value_name = "FILE:LINE[:COL]")]
        select: String,
        /// Which fix to use, counting from 1.
        #[arg(long)]
        index: Option<usize>,
        /// Write the edits and re-check.
        #[arg(long)]
        apply: bool,
    },
    /// Generate the HTML summary.
    Doc {
        /// Project directory (default: --root or the current directory).
        path: Option<PathBuf>,
        /// Output directory (default: `doc_out` from the config, relative to the root).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interactive top level, optionally after consulting files.
    Repl { files: Vec<PathBuf> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pldev: {e:#}");
            ExitCode::from(2)
        }
    }
}
