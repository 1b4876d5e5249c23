use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: u64, n: u64 },

    #[error("update magnitude {value} exceeds bound {bound}")]
    MagnitudeTooLarge { value: i64, bound: u64 },

    #[error("zero has no discrete logarithm")]
    ZeroElement,

    #[error("sketches are incompatible: {0}")]
    Incompatible(String),

    /// The power sums admit no explanation by a sufficiently sparse vector.
    #[error("syndrome decoding failed")]
    DecodeFailure,

    #[error("estimate failed: {0}")]
    EstimateFailure(String),

    #[error("{failed} of {reps} repetitions failed")]
    MajorityFailure { failed: usize, reps: usize },

    #[error("bad magic bytes")]
    BadMagic,

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("corrupt parameters: {0}")]
    CorruptParams(String),
}
