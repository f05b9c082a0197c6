use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid continued fraction: {0}")]
    InvalidCoefficients(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The working precision cannot determine the requested quantity.
    #[error("precision exhausted: {0}")]
    Precision(String),

    /// A rotation-word position whose letter cannot be classified even with
    /// the deepest stored convergent.
    #[error("rotation word is boundary-ambiguous at position n = {position}")]
    AmbiguousPosition { position: i64 },

    #[error("level {requested} exceeds the stored continued-fraction depth {available}")]
    DepthExhausted { requested: i64, available: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("word {0} does not belong to the Sturmian language of this rotation number")]
    NotInLanguage(String),

    #[error("word is a subword of s_{level}; no {level}-partition exists")]
    LevelTooCoarse { level: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("malformed packed word: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Precision,
    Resource,
    Other,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidCoefficients(_)
            | Error::InvalidArgument(_)
            | Error::NotInLanguage(_)
            | Error::LevelTooCoarse { .. }
            | Error::Format(_) => ErrorClass::Config,
            Error::Precision(_) | Error::AmbiguousPosition { .. } => ErrorClass::Precision,
            Error::DepthExhausted { .. } | Error::Resource(_) => ErrorClass::Resource,
            _ => ErrorClass::Other,
        }
    }
}
