//! Computational toolkit for regular step-2 nilpotent Lie algebras.
//!
//! * [`lie`]: bracket tensors, regularity, coadjoint orbits, dilations.
//! * [`symplectic`]: compatible complex structures and Darboux bases.
//! * [`htype`]: Clifford relations, H-type classification, catalog algebras.
//! * [`fock`]: truncated symmetric Fock spaces and Toeplitz shifts.
//! * [`repn`]: Kirillov representations and principal symbols.
//! * [`field`]: osculating algebras of polynomial distributions.

pub mod error;
pub mod field;
pub mod fock;
pub mod htype;
pub mod lie;
pub mod linalg;
pub mod repn;
pub mod sampling;
pub mod symplectic;

pub use error::{Error, Result};
pub use lie::Step2Algebra;
