use std::path::PathBuf;

use serde_json::{json, Value};
use unitrans::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    /// A library error raised while reading one of the input files.
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: Error },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    fn core(&self) -> Option<&Error> {
        match self {
            CliError::Core(e) | CliError::Input { source: e, .. } => Some(e),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(e) | CliError::Input { source: e, .. } => match e {
                Error::Config(_) => "config",
                Error::Domain(_) => "domain",
                Error::Alignment(_) => "alignment",
                Error::Truncation { .. } => "truncation",
                Error::Resource { .. } => "resource",
                Error::Numerical(_) => "numerical",
                Error::GaugeDegenerate { .. } => "gauge-degenerate",
                Error::Capability(_) => "capability",
                Error::Input(_) => "input",
                Error::Parse { .. } => "parse",
            },
        }
    }

    /// 2 for invalid input, 3 for exhausted resources, 4 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" | "domain" | "alignment" | "input" | "parse" | "usage" | "gauge-degenerate" | "capability" => 2,
            "resource" => 3,
            "io" => 4,
            _ => 1,
        }
    }

    /// Machine-readable record printed on stderr.
    pub fn record(&self) -> Value {
        let mut rec = json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Input { path, .. } | CliError::Io { path, .. } => {
                rec["path"] = json!(path.display().to_string());
            }
            _ => {}
        }
        match self.core() {
            Some(Error::Parse { line, .. }) => rec["line"] = json!(line),
            Some(Error::Resource { feasible, .. }) => rec["feasible"] = json!(feasible),
            Some(Error::GaugeDegenerate { site, .. }) => rec["site"] = json!(site),
            _ => {}
        }
        rec
    }
}

pub type CliResult<T> = Result<T, CliError>;
