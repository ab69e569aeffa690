//! Hamiltonian Lie algebras P(3, m, ω) over GF(2^k).
//!
//! The crate builds the algebras from a closed, nondegenerate,
//! non-alternating symmetric 2-form on a truncated divided-power ring,
//! classifies the forms up to admissible automorphisms, and analyses the
//! resulting algebras (simplicity, derived series, minimal ad-rank).

#![allow(clippy::needless_range_loop, clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

pub mod admiso;
pub mod bilin;
pub mod divpow;
pub mod error;
pub mod gfield;
pub mod hamlie;
pub mod linalg;
pub mod lstruct;
pub mod serial;
pub mod sforms;

pub use error::{Error, Result};
