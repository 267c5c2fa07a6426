//! LU factorization with partial pivoting: determinants and linear solves.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Packed LU factors of a square matrix, with the pivot permutation.
pub struct LuFactors {
    lu: Matrix,
    pivots: Vec<usize>,
    swap_sign: f64,
}

/// Factorizes `PA = LU` with partial pivoting. Singular matrices factor
/// with zero pivots; `determinant` then returns 0 and `solve` rejects.
pub fn lu_factor(a: &Matrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut pivots = vec![0usize; n];
    let mut sign = 1.0;

    for k in 0..n {
        let mut max_val = lu.get(k, k).abs();
        let mut max_row = k;
        for i in (k + 1)..n {
            let v = lu.get(i, k).abs();
            if v > max_val {
                max_val = v;
                max_row = i;
            }
        }
        pivots[k] = max_row;
        if max_row != k {
            for j in 0..n {
                let t = lu.get(k, j);
                lu.set(k, j, lu.get(max_row, j));
                lu.set(max_row, j, t);
            }
            sign = -sign;
        }
        let pivot = lu.get(k, k);
        if pivot == 0.0 {
            continue;
        }
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            for j in (k + 1)..n {
                lu.set(i, j, lu.get(i, j) - factor * lu.get(k, j));
            }
        }
    }
    Ok(LuFactors {
        lu,
        pivots,
        swap_sign: sign,
    })
}

impl LuFactors {
    /// Product of pivots, signed by the row swaps.
    pub fn determinant(&self) -> f64 {
        let n = self.lu.rows();
        let mut det = self.swap_sign;
        for i in 0..n {
            det *= self.lu.get(i, i);
        }
        det
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::DimMismatch {
                context: "LU solve right-hand side",
                expected: n,
                got: b.rows(),
            });
        }
        for i in 0..n {
            if self.lu.get(i, i) == 0.0 {
                return Err(Error::DegenerateInput("singular matrix in LU solve".into()));
            }
        }
        let mut x = b.clone();
        for col in 0..b.cols() {
            // Apply the pivot permutation.
            for (k, &p) in self.pivots.iter().enumerate() {
                if p != k {
                    let t = x.get(k, col);
                    x.set(k, col, x.get(p, col));
                    x.set(p, col, t);
                }
            }
            // Forward substitution (unit lower triangle).
            for i in 1..n {
                let mut s = x.get(i, col);
                for j in 0..i {
                    s -= self.lu.get(i, j) * x.get(j, col);
                }
                x.set(i, col, s);
            }
            // Back substitution.
            for i in (0..n).rev() {
                let mut s = x.get(i, col);
                for j in (i + 1)..n {
                    s -= self.lu.get(i, j) * x.get(j, col);
                }
                x.set(i, col, s / self.lu.get(i, i));
            }
        }
        Ok(x)
    }
}

/// Determinant via LU with partial pivoting.
pub fn lu_determinant(x: &Matrix) -> Result<f64> {
    Ok(lu_factor(x)?.determinant())
}
