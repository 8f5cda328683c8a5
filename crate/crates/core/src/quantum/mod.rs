//! Density matrices over named registers, Kraus channels, race detection and
//! restriction to public variables.

mod channel;
pub mod library;
mod register;
mod state;

use num_complex::Complex64;
use thiserror::Error;

pub use channel::{ChannelReport, QuantumChannel};
pub use register::{QuantumRegister, MAX_DIMENSION};
pub use state::{Fingerprint, QuantumState};

pub type Matrix = nalgebra::DMatrix<Complex64>;

/// Default tolerance for every numerical comparison of states and channels.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("quantum variable `{0}` is not part of the register")]
    UnknownVariable(String),
    #[error("quantum variable `{0}` appears twice")]
    DuplicateVariable(String),
    #[error("variable `{name}` has dimension {dim}; dimensions must be at least 2")]
    BadDimension { name: String, dim: usize },
    #[error("register dimension {0} exceeds the cap of {MAX_DIMENSION}")]
    TooLarge(usize),
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("channel is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("channel has no Kraus operators")]
    EmptyChannel,
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("registers differ")]
    RegisterMismatch,
    #[error("measurement outcome has probability {0:.3e}")]
    ImpossibleOutcome(f64),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest absolute entry of `a - b`.
pub fn max_norm_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
