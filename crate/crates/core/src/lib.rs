//! Approximate coded distributed computation of matrix functions.
//!
//! A master encodes K input matrices into a degree-G matrix polynomial
//! whose coefficients are produced by trainable networks; each worker
//! applies a degree-P vector-valued computation polynomial to its encoded
//! matrix. The composite worker output is a polynomial of degree G·P in
//! the evaluation scalar, so the master can interpolate it from any
//! R = G·P + 1 worker results and read the approximated function values
//! off at fixed anchor scalars — tolerating up to N − R stragglers or
//! erasures. An exact Lagrange-coded baseline for matrix polynomials, the
//! four target problems (eigenvalues, dominant eigenvector, matrix
//! exponential, determinant) with their reference oracles, a deterministic
//! cluster simulator, and a CLI experiment harness round out the crate.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod datagen;
pub mod error;
pub mod interp;
pub mod lcc;
pub mod linalg;
pub mod nn;
pub mod rng;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
