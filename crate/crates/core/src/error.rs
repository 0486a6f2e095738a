use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} is not coprime with the modulus")]
    NotCoprime { what: String },

    #[error("modulus must be odd")]
    EvenModulus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("cover has {cover} bytes but the secret needs {secret}")]
    CoverTooShort { secret: usize, cover: usize },

    #[error("extracted value {value} at position {position} is not a byte")]
    ExtractOutOfRange { position: usize, value: String },

    #[error("missing {0} marker")]
    MissingMarker(&'static str),

    #[error("signature block holds an odd number of tokens ({0})")]
    OddTokenCount(usize),

    #[error("malformed integer {token:?} at token {position}")]
    MalformedInteger { position: usize, token: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unsupported header {0:?}")]
    UnsupportedVersion(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("no integer parameters reproduce the table: {0}")]
    NoFit(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn not_coprime(what: impl Into<String>) -> Self {
        Error::NotCoprime { what: what.into() }
    }
}
