use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty name")]
    EmptyName,
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("duplicate run id `{0}`")]
    DuplicateRun(String),
    #[error("undeclared agent `{0}`")]
    UndeclaredAgent(String),
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error("unknown run `{0}`")]
    UnknownRun(String),
    #[error("system has no runs")]
    NoRuns,
    #[error("partition for `{observer}` does not cover runs: {detail}")]
    PartitionNotCovering { observer: String, detail: String },
    #[error("duplicate partition for observer `{0}`")]
    DuplicatePartition(String),
    #[error("observer `{0}` has no declared partition")]
    NoPartition(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("derived family `{0}` already present")]
    FamilyNotFresh(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("search failed: {0}")]
    SearchExhausted(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("line {line}:{column}: {inner}")]
    At {
        line: usize,
        column: usize,
        inner: Box<Error>,
    },
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn at(line: usize, column: usize, inner: Error) -> Self {
        Error::At {
            line,
            column,
            inner: Box::new(inner),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
