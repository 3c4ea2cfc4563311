//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("workload: {0}")]
    Workload(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("policy configuration: {0}")]
    Policy(String),

    #[error("unstable parameters: {0}")]
    Unstable(String),

    #[error("simulation: {0}")]
    Sim(String),

    #[error("fixed point did not converge: residual {residual} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
}

impl Error {
    pub fn workload(msg: impl Into<String>) -> Self {
        Error::Workload(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn policy(msg: impl Into<String>) -> Self {
        Error::Policy(msg.into())
    }
    pub fn unstable(msg: impl Into<String>) -> Self {
        Error::Unstable(msg.into())
    }
    pub fn sim(msg: impl Into<String>) -> Self {
        Error::Sim(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
