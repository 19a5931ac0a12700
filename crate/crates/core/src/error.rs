use thiserror::Error;

/// Errors raised by the simulator and its analysis tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration produced a non-finite state: {0}")]
    Integration(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trial aborted at t = {t:.3} s: {reason}")]
    TrialAborted { t: f64, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
