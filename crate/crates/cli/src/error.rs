use std::fmt;

/// Failures of the command-line layer, each mapped to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed input text at a known position (1-based line and column).
    Parse { origin: String, line: usize, column: usize, message: String },
    /// Well-formed input that describes an invalid instance or request.
    Invalid(String),
    Io(String),
    Core(fairalloc::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(fairalloc::Error::Resource { .. }) => 3,
            _ => 2,
        }
    }

    /// Positions a message at byte offset `at` of `source`.
    pub fn at(origin: &str, source: &str, at: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_column(source, at);
        CliError::Parse { origin: origin.to_string(), line, column, message: message.into() }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_column(source: &str, at: usize) -> (usize, usize) {
    let at = at.min(source.len());
    let before = &source[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { origin, line, column, message } => write!(f, "{origin}:{line}:{column}: {message}"),
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fairalloc::Error> for CliError {
    fn from(e: fairalloc::Error) -> Self {
        CliError::Core(e)
    }
}
