use std::path::{Path, PathBuf};

/// Name of the optional project configuration file at the project root.
pub const CONFIG_FILE: &str = "pldev.conf";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Human,
    Machine,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "human" => Some(OutputFormat::Human),
            "machine" => Some(OutputFormat::Machine),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub globs: Vec<String>,
    pub lib_paths: Vec<PathBuf>,
    pub format: OutputFormat,
    pub completion_cap: usize,
    pub doc_out: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            globs: vec!["**/*.pl".into()],
            lib_paths: Vec::new(),
            format: OutputFormat::Human,
            completion_cap: 50,
            doc_out: PathBuf::from("doc"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Config {
    /// Parse flat `key = value` text. `glob` and `lib` may repeat; a
    /// repeated `glob` replaces the default pattern.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        let mut globs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError::Syntax { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "glob" => globs.push(value.to_string()),
                "lib" => config.lib_paths.push(PathBuf::from(value)),
                "format" => config.format = OutputFormat::parse(value).ok_or_else(|| err(format!("unknown format {value}")))?,
                "completion_cap" => {
                    config.completion_cap = value
                        .parse()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| err("completion_cap must be a positive integer".into()))?
                }
                "doc_out" => config.doc_out = PathBuf::from(value),
                other => return Err(err(format!("unknown key {other}"))),
            }
        }
        if !globs.is_empty() {
            config.globs = globs;
        }
        Ok(config)
    }

    /// The config file at `root`, or defaults when there is none. Relative
    /// library paths are taken relative to `root`.
    pub fn load(root: &Path) -> Result<Config, ConfigError> {
        let path = root.join(CONFIG_FILE);
        if !path.is_file() {
            return Ok(Config::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Io { path: path.clone(), message: e.to_string() })?;
        let mut config = Config::parse(&text)?;
        for p in &mut config.lib_paths {
            if p.is_relative() {
                *p = root.join(&*p);
            }
        }
        Ok(config)
    }
}
