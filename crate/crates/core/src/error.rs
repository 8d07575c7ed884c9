use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {what} = {value} (limit {limit})")]
    Resource {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("state error: {0}")]
    State(String),

    #[error("cannot classify time scale: {0}")]
    Classification(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
