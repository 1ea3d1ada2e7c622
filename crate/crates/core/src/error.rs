use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Required coefficient, coin or parameter missing from the input data.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Windows or index conventions do not line up.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// A state reached the edge of the stored operator window.
    #[error("truncation: support {support:?} touches window {window:?}")]
    Truncation {
        support: (i64, i64),
        window: (i64, i64),
    },

    /// Resource budget (memory, length, horizon) exceeded.
    #[error("resource limit: {message} (largest feasible: {feasible})")]
    Resource { message: String, feasible: u64 },

    /// Linear algebra failure.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Coins whose diagonal vanishes, so the gauge phases are undefined.
    #[error("gauge-degenerate coin at site {site}: {reason}")]
    GaugeDegenerate { site: i64, reason: String },

    /// Operation needs data the input does not carry.
    #[error("capability error: {0}")]
    Capability(String),

    /// Malformed or insufficient input.
    #[error("input error: {0}")]
    Input(String),

    /// Parse failure in one of the plain-text formats.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
