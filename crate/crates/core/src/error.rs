//! Error type shared by every layer of the engine.

use thiserror::Error;

/// All failure modes surfaced by the library.
///
/// Errors fall into three rough groups, which the CLI maps to exit codes:
/// bad input data (exit 1), a broken internal invariant (exit 2), and
/// exhausted randomized fallbacks (exit 3).
#[derive(Debug, Clone, Error)]
pub enum Error {
    // ---- context construction ----
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("defining polynomial is reducible")]
    Reducible,
    #[error("defining polynomial is not monic")]
    NotMonic,

    // ---- modular / p-adic arithmetic ----
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("elements belong to different contexts")]
    ContextMismatch,
    #[error("element is not divisible by the requested power of p")]
    NotDivisible,

    // ---- polynomial algebra ----
    #[error("inexact polynomial division")]
    InexactDivision,
    #[error("matrix is not invertible modulo B")]
    NotInvertibleModB,
    #[error("linear system is rank deficient")]
    RankDeficient,
    #[error("linear system is inconsistent")]
    Inconsistent,

    // ---- series ----
    #[error("digit {digit} out of range for characteristic {p}")]
    DigitOutOfRange { digit: u64, p: u64 },
    #[error("quotient is not a power series (valuation would be negative)")]
    NotASeries,
    #[error("division by a zero series")]
    ZeroDivisor,
    #[error("initial segment does not satisfy the defining equation")]
    BadInitialSegment,

    // ---- section-matrix construction ----
    #[error("no suitable modulus B found after retries")]
    NoGoodModulus,

    // ---- reconstruction ----
    #[error("reconstruction system is rank deficient; defining polynomial is not irreducible")]
    InstanceNotIrreducible,

    // ---- recurrence engine ----
    #[error("instance is singular at the origin (H1 fails)")]
    H1Violated,
    #[error("derivation produced no usable differential relation")]
    SingularDerivation,
    #[error("randomized splitting failed after retries")]
    SplitFailed,
    #[error("no admissible translation point in the base field")]
    NoAdmissibleAlpha,

    // ---- input ----
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("instance invariant violated: {0}")]
    InvariantViolation(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The input data is invalid (exit code 1).
    Input,
    /// An internal invariant was violated (exit code 2).
    Internal,
    /// All randomized fallbacks were exhausted (exit code 3).
    Fallback,
}

impl ErrorClass {
    /// Process exit code the CLI uses for this class.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 1,
            ErrorClass::Internal => 2,
            ErrorClass::Fallback => 3,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NonPrime(_) | Reducible | NotMonic | ParseError { .. } | InvariantViolation(_)
            | InstanceNotIrreducible | BadInitialSegment | DigitOutOfRange { .. }
            | H1Violated => ErrorClass::Input,
            NoGoodModulus | SplitFailed | NoAdmissibleAlpha => ErrorClass::Fallback,
            _ => ErrorClass::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
