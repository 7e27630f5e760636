use thiserror::Error;

use crate::model::{SchemeViolation, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid band scheme: {}", join(.0))]
    InvalidScheme(Vec<SchemeViolation>),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(Violation),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Brute-force enumeration refused because the instance is too large.
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    /// Iteration, pivot or node cap reached.
    #[error("limit reached: {0}")]
    Limit(String),

    #[error("numerical trouble: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

fn join(v: &[SchemeViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
