use thiserror::Error;

use crate::bitcore::Column;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bit string length {len} outside 1..={max}")]
    LengthOutOfRange { len: usize, max: usize },

    #[error("value {value:#b} does not fit in {len} bits")]
    ValueTooWide { value: u32, len: usize },

    #[error("invalid bit character {0:?}")]
    InvalidBitChar(char),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Column `index` is 1-based.
    #[error("promise violated at column {index}: x_i y_i z_i = {column}")]
    PromiseViolation { index: usize, column: Column },

    #[error("column {0} is not one of 001, 010, 100, 111")]
    IllegalColumn(Column),

    #[error("support string {basis:03b} of column {column} has parity {parity}, expected {expected}")]
    ParityMismatch {
        column: Column,
        basis: u8,
        parity: bool,
        expected: bool,
    },

    #[error("zero counts r_A={r_a} r_B={r_b} r_C={r_c} do not sum to 2k with k={k}")]
    CountingIdentity {
        r_a: u32,
        r_b: u32,
        r_c: u32,
        k: u32,
    },

    /// `location` names the offending record (`record 2`) or `output`.
    #[error("locality violation at {location}: {detail}")]
    Locality { location: String, detail: String },

    #[error("operation requires n={expected}, got n={actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("unknown case id {0:?}")]
    UnknownCase(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
