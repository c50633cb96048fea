use num_bigint::BigUint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank {rank} is out of range for a family of {size} words")]
    RankOutOfRange { rank: BigUint, size: BigUint },

    #[error("message index {message} is out of range for k = {info_bits}")]
    MessageOutOfRange { message: u128, info_bits: u32 },

    #[error("word length {actual} does not match the expected length {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("inadmissible word: {reason} at bit {position}")]
    Inadmissible {
        position: usize,
        reason: &'static str,
    },

    #[error("invalid bit string: {0}")]
    BitString(String),

    #[error("a codebook of 2^{info_bits} words exceeds the materialization limit of 2^{limit}")]
    SizeGuard { info_bits: u32, limit: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("codebook has zero total weight")]
    ZeroWeight,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("table container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
