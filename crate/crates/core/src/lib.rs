//! Exact computation of the N-th power series coefficient of an algebraic
//! function over a finite field.
//!
//! Given a monic separable polynomial `E(t, y)` over `F_{p^s}` and enough
//! initial coefficients to single out one of its power series roots `f`, the
//! routines here compute the coefficient of `t^N` in `f` exactly, for `N` far
//! beyond the reach of direct series expansion.  The digit-by-digit approach
//! walks the base-`p` digits of `N` with section (half-decimation) operators;
//! four interchangeable engines realize the digit steps:
//!
//! * `bivariate`: sections of bivariate polynomial representatives in a
//!   fixed finite-dimensional stable space,
//! * `matrix`: precomputed section matrices applied to coordinate vectors,
//! * `hermite-pade`: per-digit linear-algebra reconstruction of the
//!   representative from a fixed basis of series,
//! * `recurrence`: a lifted linear recurrence evaluated by matrix-factorial
//!   products with baby-step/giant-step balancing, intended for large `p`.
//!
//! A direct Newton-iteration series expansion serves as a cross-check oracle
//! in tests and behind `--verify`.

pub mod christol;
pub mod cli;
pub mod error;
pub mod factor;
pub mod field;
pub mod gen;
pub mod hermite_pade;
pub mod linalg;
pub mod padic;
pub mod poly;
pub mod recurrence;
pub mod ring;
pub mod series;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, ErrorClass, Result};
