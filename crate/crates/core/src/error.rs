//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors raised by construction, validation, and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor or scenario invariant was violated. The message names
    /// the invariant.
    Invalid(String),
    /// A field or grid was used with a basis of a different size.
    DimensionMismatch { expected: usize, got: usize },
    /// A time outside the covered history span was requested; the buffer
    /// never extrapolates.
    SpanNotCovered { requested: f64, lo: f64, hi: f64 },
    /// `append` was called with a time at or before the last stored sample.
    NonMonotoneTime { last: f64, got: f64 },
    /// The integrator produced a non-finite coefficient and aborted.
    NonFiniteState { t: f64 },
    /// A time shift was not a multiple of the trajectory step.
    MisalignedShift { shift: f64, dt: f64 },
    /// An analysis routine needs a longer trajectory than it was given.
    HorizonTooShort { needed: f64, have: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SpanNotCovered { requested, lo, hi } => write!(
                f,
                "time {requested} outside covered history span [{lo}, {hi}]"
            ),
            Error::NonMonotoneTime { last, got } => {
                write!(f, "sample time {got} not after last stored time {last}")
            }
            Error::NonFiniteState { t } => {
                write!(f, "non-finite state encountered at t = {t}")
            }
            Error::MisalignedShift { shift, dt } => {
                write!(f, "shift {shift} is not a multiple of the step {dt}")
            }
            Error::HorizonTooShort { needed, have } => {
                write!(f, "horizon {have} too short: need at least {needed}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
