//! Exact linear algebra over F₂: bit vectors, canonical subspaces, linear
//! and affine maps, and subspace enumeration.

mod bitvec;
mod enumerate;
mod linear;
mod subspace;

pub use bitvec::{BitVec, MAX_DIM};
pub use enumerate::{enumerate_subspaces, galois_number, gaussian_binomial, MAX_ENUMERATION_DIM};
pub use linear::{AffineMap, LinearMap};
pub use subspace::Subspace;

pub(crate) use bitvec::mask;
pub(crate) use enumerate::subspaces_of_dim;
pub(crate) use subspace::Echelon;
