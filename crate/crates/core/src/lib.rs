//! Chevalley mappings of finite reflection groups and the transfer of jets
//! between invariant functions `f` and functions `F` of the invariants,
//! `f = F∘P`.

pub mod chevalley;
pub mod error;
pub mod geometry;
pub mod groups;
pub mod jets;
pub mod linalg;
pub mod polynomial;
pub mod sampling;
pub mod scalar;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use polynomial::{MultiIndex, Poly};
pub use scalar::{Rational, Scalar};
