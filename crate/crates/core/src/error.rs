use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input arity: {0}")]
    InputArity(String),

    #[error("invalid width: {0}")]
    InvalidWidth(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("malformed formula: {0}")]
    Malformed(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("not in normal form: {0}")]
    NotNormalForm(String),

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by resource ceilings rather than bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity(_))
    }
}
