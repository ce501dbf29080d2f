//! Exact finite-time transition probabilities for the multi-species totally
//! asymmetric simple exclusion process on Z with species-dependent jump
//! rates.
//!
//! The probabilities are evaluated from a Bethe-ansatz contour-integral
//! representation: a sum over the symmetric group of N-fold integrals of
//! products of two-particle scattering matrices. The [`oracle`] module
//! provides independent ground truth (uniformized matrix exponential of the
//! truncated generator, and Gillespie simulation).
//!
//! All operator matrices are block diagonal across species multisets, so
//! everything here works on the block ("sector") of the initial multiset.

pub mod bethe;
pub mod error;
pub mod oracle;
pub mod perm;
pub mod rmatrix;
pub mod sector;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
