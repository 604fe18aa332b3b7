//! Three-party communication with and without shared entanglement.
//!
//! Alice, Bob and Carol hold `n`-bit strings `x`, `y`, `z` with
//! `x + y + z = 11...1` bitwise, and Alice must learn
//! `x_1 y_1 z_1 + ... + x_n y_n z_n (mod 2)`.
//!
//! - [`bitcore`]: bit strings, the promise set and the target functions.
//! - [`qsim`]: exact simulation of one entangled qubit triple.
//! - [`protocols`]: the two-bit entangled protocol, the three-bit and
//!   counting classical protocols, two-party baselines, and a locality audit.
//! - [`lowerbound`]: exhaustive proof that no two-bit classical protocol
//!   exists for `n = 3`, plus a replay of the case analysis behind it.
//!
//! Lower bounds for `n > 3` follow from `n = 3` by fixing every input column
//! past the third to `111`, which leaves the function unchanged on the first
//! three columns; that reduction is not re-checked here.

pub mod bitcore;
pub mod error;
pub mod lowerbound;
pub mod protocols;
pub mod qsim;

pub use bitcore::{
    enumerate_promise, f_ghz, f_inner_product, f_parity, reduce_to_inner_product, BitString,
    Column, FunctionTable, Party, PromiseTriple,
};
pub use error::{Error, Result};
