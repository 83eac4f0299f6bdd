use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty word")]
    EmptyWord,
    #[error("invalid bit value {value} at position {pos}")]
    InvalidBit { pos: usize, value: u8 },
    #[error("invalid character {found:?} at position {pos}; expected 0 or 1")]
    InvalidChar { pos: usize, found: char },
    #[error("invalid hex input: {0}")]
    InvalidHex(String),
    #[error("{0}")]
    Domain(String),
    #[error("word is constant; the empirical entropy is zero")]
    ConstantWord,
    #[error("conditional entropy is zero; x is determined by y")]
    ZeroConditionalEntropy,
    #[error("empirical mutual information {0:.3e} is below the 1e-6 baseline floor")]
    ZeroMutualBaseline(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("codeword truncated")]
    Truncated,
    #[error("malformed codeword: {0}")]
    Malformed(&'static str),
    #[error("unknown coder {0:?}")]
    UnknownCoder(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("external compressor failed: {0}")]
    External(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
