use thiserror::Error;

/// Errors shared by all workbench operations.
///
/// Law violations are not errors: checkers return a [`crate::LawReport`]
/// describing the first counterexample instead.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WbError {
    #[error("parse error: {0}")]
    Parse(String),

    /// An evaluation would exceed an explicit bound. Infinite constructions
    /// refuse rather than silently truncate.
    #[error("bound overflow: {0}")]
    BoundOverflow(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A composition or action table has no entry for the requested inputs.
    #[error("undefined table entry: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, WbError>;
