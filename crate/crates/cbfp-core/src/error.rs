//! Error type shared across the crate.

use std::fmt;
use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the codec, block arithmetic, metrics, and the
/// transceiver chain.
#[derive(Debug)]
pub enum Error {
    /// Input scalar is NaN, infinite, denormal, or not representable in the
    /// requested format.
    UnsupportedValue(String),
    /// Two block operands use different scalar formats.
    FormatMismatch,
    /// Element-wise operands have different sample counts.
    BlockSizeMismatch { left: usize, right: usize },
    /// An intermediate or output exponent left the representable range.
    ExponentOverflow,
    /// Sequences that must have equal lengths do not.
    LengthMismatch { left: usize, right: usize },
    /// EVM reference vector has zero norm.
    ZeroReference,
    /// Dynamic range of an all-zero sequence is undefined.
    AllZero,
    /// Requested input ratio pushes exponents outside the normal range.
    RatioOutOfRange(f64),
    /// Downsampler offset beyond the input.
    OffsetOutOfRange { offset: usize, len: usize },
    /// Bit count is not a multiple of the bits-per-symbol.
    BitCountNotMultipleOfJ { bits: usize, j: u32 },
    /// Roll-off factor outside (0, 1) or odd filter order.
    InvalidRolloff(f64),
    /// Malformed serialized block.
    InvalidBlockFile(String),
    /// Config file problem, with 1-based line number where applicable.
    InvalidConfig { line: usize, message: String },
    /// Bad command-line flag or value.
    InvalidArgument(String),
    /// Underlying I/O failure.
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedValue(what) => write!(f, "unsupported value: {what}"),
            Error::FormatMismatch => write!(f, "operand scalar formats differ"),
            Error::BlockSizeMismatch { left, right } => {
                write!(f, "block sizes differ: {left} vs {right}")
            }
            Error::ExponentOverflow => write!(f, "exponent overflow"),
            Error::LengthMismatch { left, right } => {
                write!(f, "sequence lengths differ: {left} vs {right}")
            }
            Error::ZeroReference => write!(f, "reference vector has zero norm"),
            Error::AllZero => write!(f, "sequence is all zero"),
            Error::RatioOutOfRange(r) => write!(f, "inputs ratio {r} dB out of range"),
            Error::OffsetOutOfRange { offset, len } => {
                write!(f, "offset {offset} out of range for length {len}")
            }
            Error::BitCountNotMultipleOfJ { bits, j } => {
                write!(f, "bit count {bits} is not a multiple of {j}")
            }
            Error::InvalidRolloff(a) => write!(f, "invalid roll-off factor {a}"),
            Error::InvalidBlockFile(what) => write!(f, "invalid block file: {what}"),
            Error::InvalidConfig { line, message } => {
                write!(f, "config line {line}: {message}")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
