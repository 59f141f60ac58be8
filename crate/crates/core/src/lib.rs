//! Algebraic analysis of AES-like key schedules.
//!
//! The crate models one round of a 4-branch key schedule as an operator on
//! V⁴ built from a single permutation ρ of V = F₂ⁿ, and provides the tools
//! needed to study the group it generates together with all translations:
//! F₂ linear algebra, S-box differential and anti-invariance properties,
//! Goursat decompositions of subspaces of direct products, and searches for
//! invariant linear partitions.

pub mod error;
pub mod gf2;
pub mod goursat;
pub mod invariants;
pub mod keyschedule;
pub mod sbox;

pub use error::{Error, Result};
