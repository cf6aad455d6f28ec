use std::fmt;

use thiserror::Error;

use crate::model::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A list of validation errors promoted to a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid model:\n{0}")]
    InvalidModel(Diagnostics),

    #[error("digital state space exceeds the cap of {cap} states")]
    StateCap { cap: usize },

    #[error("{what}: {count} exceeds the cap of {cap}")]
    ResourceCap { what: &'static str, count: u128, cap: u128 },

    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergence { sweeps: u64, residual: f64 },

    #[error("deadline exceeded")]
    Timeout,

    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("strategy has no distribution for {agent}.{location}")]
    MissingBlock { agent: String, location: String },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("formula: {0}")]
    Formula(String),

    #[error("parametric oracle: {0}")]
    Parametric(String),

    #[error("TGC formula requires n >= 2 trains (got n = {0})")]
    TgcTooFewTrains(usize),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
