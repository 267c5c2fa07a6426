//! Dense real linear algebra and the exact reference implementations of the
//! four target matrix functions (eigenvalues, dominant eigenvector, matrix
//! exponential, determinant).
//!
//! All operations are pure functions over immutable inputs; 64-bit floats
//! throughout.

mod eigen;
mod expm;
mod lu;
mod matrix;

pub use eigen::{dominant_eigenvector, operator_norm, sym_eigen, sym_eigenvalues};
pub use expm::matrix_exp;
pub use lu::{lu_determinant, lu_factor, LuFactors};
pub use matrix::{mat_pow, mat_powers, Matrix, Vector};
