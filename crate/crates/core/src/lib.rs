//! Finite-dimensional certificates, dilations and decompositions for
//! doubly commuting tuples of operators in the `C(1,r)` class and the
//! quantum annulus `QA(r)`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod classes;
pub mod conformal;
pub mod decomposition;
pub mod dilation;
pub mod error;
pub mod instances;
mod jacobi;
pub mod matrix;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{Basis, ComplexMatrix, Tolerances};
pub use num_complex::Complex64;
