use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bit index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },

    #[error("width {width} exceeds the brute-force oracle limit of {limit} bits")]
    OracleLimit { width: usize, limit: usize },

    #[error("no ancilla line available to factorize a {controls}-control gate")]
    NoAncilla { controls: usize },

    #[error("gate is not inflationary")]
    NotInflationary,

    #[error("invalid register layout: {0}")]
    Layout(String),

    #[error("BDD variable orders are incompatible: {0}")]
    OrderMismatch(String),

    #[error("assignment does not cover variable {0}")]
    MissingVariable(u32),

    #[error("singular matrix: map is not invertible")]
    Singular,

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
