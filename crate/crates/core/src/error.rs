use thiserror::Error;

/// Location-carrying syntax error from the `.ssg` reader or the word parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{origin}:{line}:{column}: {message}")]
pub struct ParseError {
    pub origin: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A well-formed definition that does not describe a valid recursion system.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no generators declared")]
    NoGenerators,
    #[error("alphabet must have at least two distinct letters")]
    AlphabetTooSmall,
    #[error("letter `{0}` appears twice in the alphabet")]
    DuplicateLetter(String),
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("invalid generator name `{0}`")]
    BadGeneratorName(String),
    #[error("generator `{generator}`: unknown symbol `{symbol}` in section word")]
    UnknownSymbol { generator: String, symbol: String },
    #[error("generator `{generator}`: cycle letter `{letter}` is not in the alphabet")]
    CycleLetter { generator: String, letter: String },
    #[error("generator `{generator}`: letter `{letter}` occurs in more than one cycle position")]
    OverlappingCycles { generator: String, letter: String },
    #[error("generator `{generator}`: expected {expected} sections, found {found}")]
    SectionCount { generator: String, expected: usize, found: usize },
    #[error("permutation images are not a bijection on the alphabet")]
    NotAPermutation,
    #[error("backend: {0}")]
    Backend(String),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),
    #[error("unknown letter index {0}")]
    UnknownLetter(usize),
    #[error("budget exceeded in {what} after {states} states")]
    BudgetExceeded { what: &'static str, states: usize },
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("operation requires the {0} backend")]
    WrongBackend(&'static str),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
