//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the field, geometry, counting and
/// experiment layers. Arithmetic on scalars from mismatched fields is a
/// programming bug and panics instead (see [`crate::field::Field`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("field size {p}^{n} exceeds 2^31")]
    TooLarge { p: u64, n: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("code {code} is out of range for GF({q})")]
    CodeOutOfRange { code: u64, q: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("operands belong to different fields (GF({left}) vs GF({right}))")]
    MixedFields { left: u32, right: u32 },

    #[error("-1 is a square in GF({q}); the plane has nonzero isotropic vectors")]
    HypothesisViolated { q: u32 },

    #[error("distance vector has {got} entries but the graph has {want} edges")]
    ArityMismatch { got: usize, want: usize },

    #[error("support mask would need {bits} bits, above the cap of {cap}")]
    SizeOverflow { bits: u128, cap: u64 },

    #[error("a counting accumulator overflowed 128 bits")]
    AccumulatorOverflow,

    #[error("brute-force enumeration of {tuples} tuples exceeds the cap of {cap}")]
    FallbackTooLarge { tuples: u128, cap: u64 },

    #[error("requested size {size} exceeds capacity {cap}")]
    SizeTooLarge { size: u64, cap: u64 },

    #[error("weight table must be real and nonnegative")]
    NegativeInput,

    #[error("bad graph description: {0}")]
    BadGraph(String),

    #[error("bad point file (line {line}): {msg}")]
    BadPointFile { line: usize, msg: String },

    #[error("bad field descriptor: {0}")]
    BadDescriptor(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
