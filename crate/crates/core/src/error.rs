use thiserror::Error;

/// Errors raised by grid construction, kernel evaluation and time integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value in cell {cell}: {context}")]
    NonFinite { cell: usize, context: String },

    #[error("step size underflow at t = {t:e} (dt = {dt:e})")]
    Stiffness { t: f64, dt: f64 },

    #[error("step limit of {0} exceeded")]
    StepLimit(usize),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
