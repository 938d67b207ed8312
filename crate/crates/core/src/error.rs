use thiserror::Error;

/// Errors raised by the library. Invariant violations indicate a bug (or a
/// corrupted input file), everything else is a domain or resource condition.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("letter {letter} outside generator range 1..={rank}")]
    LetterOutOfRange { letter: i32, rank: usize },
    #[error("lift for stable letter t{stable} fails the inverse check on generator {generator}: {detail}")]
    LiftInverse {
        stable: usize,
        generator: String,
        detail: String,
    },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("ball vertex budget of {budget} exceeded (set HOMFILL_BUDGET_VERTICES to raise it)")]
    VertexBudget { budget: usize },
    #[error("path leaves the ball of radius {radius} after prefix {prefix}")]
    LeavesBall { radius: usize, prefix: String },
    #[error("word does not close: {0}")]
    NotClosed(String),
    #[error("chain is not a cycle: {0}")]
    NotACycle(String),
    #[error("no filling inside the ball of radius {radius}: {detail}")]
    Infeasible { radius: usize, detail: String },
    #[error("solver budget exceeded: {0}")]
    Budget(String),
    #[error("table does not cover the required value: {0}")]
    Coverage(String),
    #[error("dictionary check failed: {0}")]
    Dictionary(String),
    #[error("invalid surface diagram: {0}")]
    InvalidSurface(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that signal an internal bug rather than a domain outcome.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
