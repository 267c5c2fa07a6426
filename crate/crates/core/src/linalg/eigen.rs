//! Symmetric eigenproblems via cyclic Jacobi rotations.

use super::matrix::{Matrix, Vector};
use crate::error::{Error, Result};

const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized as `(X + Xᵀ)/2` before iterating, so slightly
/// asymmetric inputs are tolerated. Returns `(eigenvalues, eigenvectors)`
/// with orthonormal eigenvector columns, both unsorted.
pub fn sym_eigen(x: &Matrix) -> Result<(Vector, Matrix)> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let n = x.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (x.get(i, j) + x.get(j, i)));
    let mut v = Matrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < OFF_DIAG_TOL {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle annihilating a[p,q] (Golub & Van Loan 8.4).
                let theta = 0.5 * (a.get(q, q) - a.get(p, p)) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- JᵀAJ, updating only the affected rows/columns.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, c * apj - s * aqj);
                    a.set(q, j, s * apj + c * aqj);
                }
                // V <- VJ accumulates the eigenvectors.
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let eigenvalues = Vector::from_vec((0..n).map(|i| a.get(i, i)).collect());
    Ok((eigenvalues, v))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                let x = a.get(p, q);
                s += x * x;
            }
        }
    }
    s.sqrt()
}

/// All eigenvalues of a symmetric matrix, sorted ascending.
pub fn sym_eigenvalues(x: &Matrix) -> Result<Vector> {
    let (mut vals, _) = sym_eigen(x)?;
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Unit-norm eigenvector of the eigenvalue with largest absolute value.
///
/// The sign is fixed so the first component exceeding `1e-12` in magnitude
/// is positive. Errors when the two largest `|λ|` coincide within `1e-10`
/// (the eigenvector is then ill-defined).
pub fn dominant_eigenvector(x: &Matrix) -> Result<Vector> {
    let (vals, vecs) = sym_eigen(x)?;
    let n = vals.len();
    if n == 0 {
        return Err(Error::DegenerateInput("empty matrix".into()));
    }

    let mut idx = 0;
    for i in 1..n {
        if vals[i].abs() > vals[idx].abs() {
            idx = i;
        }
    }
    if n > 1 {
        let second = (0..n)
            .filter(|&i| i != idx)
            .map(|i| vals[i].abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if (vals[idx].abs() - second).abs() < 1e-10 {
            return Err(Error::DegenerateInput(format!(
                "two largest |eigenvalues| coincide within 1e-10 ({:e} vs {:e})",
                vals[idx].abs(),
                second
            )));
        }
    }

    let mut v: Vec<f64> = (0..n).map(|i| vecs.get(i, idx)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    Ok(Vector::from_vec(v))
}

/// Largest singular value, via power iteration on `XᵀX`.
///
/// Iterates to relative tolerance `1e-10` on the dominant eigenvalue of
/// `XᵀX`, capped at 10000 iterations.
pub fn operator_norm(x: &Matrix) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let n = x.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let xtx = x.transpose().matmul(x)?;

    // Deterministic start with mildly uneven components so it is not
    // orthogonal to the dominant eigenvector for structured inputs.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 + 1.0) * 1e-3).collect();
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm0;
    }

    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = xtx.matvec(&v)?;
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(0.0);
        }
        let next = wn; // Rayleigh quotient for unit v on a PSD matrix
        for (vi, wi) in v.iter_mut().zip(w.iter()) {
            *vi = wi / wn;
        }
        if (next - lambda).abs() <= 1e-10 * next.max(f64::MIN_POSITIVE) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::mat_pow;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = Matrix::from_rows(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let vals = sym_eigenvalues(&m).unwrap();
        assert_close(vals[0], 1.0, 1e-12);
        assert_close(vals[1], 2.0, 1e-12);
        assert_close(vals[2], 3.0, 1e-12);
    }

    #[test]
    fn eigenvalues_of_swap() {
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let vals = sym_eigenvalues(&m).unwrap();
        assert_close(vals[0], -1.0, 1e-12);
        assert_close(vals[1], 1.0, 1e-12);
    }

    // Characteristic-polynomial oracle for 3x3 symmetric matrices: solves
    // λ³ - c2 λ² + c1 λ - c0 = 0 by the trigonometric method (roots are
    // real for symmetric input), independent of the Jacobi path.
    fn char_poly_roots_3x3(m: &Matrix) -> Vec<f64> {
        let tr = m.trace();
        let m2 = m.matmul(m).unwrap();
        let c1 = 0.5 * (tr * tr - m2.trace());
        let c0 = det3(m);
        // Depressed cubic t³ + pt + q with λ = t + tr/3.
        let p = c1 - tr * tr / 3.0;
        let q = -2.0 * tr * tr * tr / 27.0 + tr * c1 / 3.0 - c0;
        let mut roots = if p.abs() < 1e-14 {
            let r = (-q).cbrt();
            vec![r, r, r]
        } else {
            let a = (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p * a)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| 2.0 * a * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
                .collect()
        };
        let shift = tr / 3.0;
        for r in roots.iter_mut() {
            *r += shift;
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    fn det3(m: &Matrix) -> f64 {
        m.get(0, 0) * (m.get(1, 1) * m.get(2, 2) - m.get(1, 2) * m.get(2, 1))
            - m.get(0, 1) * (m.get(1, 0) * m.get(2, 2) - m.get(1, 2) * m.get(2, 0))
            + m.get(0, 2) * (m.get(1, 0) * m.get(2, 1) - m.get(1, 1) * m.get(2, 0))
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let m = Matrix::from_rows(&[
            &[0.3, -0.52, 0.11],
            &[-0.52, 0.9, 0.47],
            &[0.11, 0.47, -0.66],
        ]);
        let vals = sym_eigenvalues(&m).unwrap();
        let expected = char_poly_roots_3x3(&m);
        for (got, want) in vals.iter().zip(expected.iter()) {
            assert_close(*got, *want, 1e-8);
        }
    }

    #[test]
    fn eigen_sum_is_trace_product_is_det() {
        let m = Matrix::from_rows(&[&[1.2, 0.3, -0.1], &[0.3, -0.4, 0.6], &[-0.1, 0.6, 0.9]]);
        let vals = sym_eigenvalues(&m).unwrap();
        let sum: f64 = vals.iter().sum();
        let prod: f64 = vals.iter().product();
        assert_close(sum, m.trace(), 1e-8);
        assert!((prod - det3(&m)).abs() / det3(&m).abs() < 1e-6);
    }

    #[test]
    fn dominant_eigenvector_diag() {
        let m = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let v = dominant_eigenvector(&m).unwrap();
        assert_close(v[0], 1.0, 1e-12);
        assert_close(v[1], 0.0, 1e-12);
    }

    #[test]
    fn dominant_eigenvector_all_ones() {
        let m = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let v = dominant_eigenvector(&m).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_close(v[0], r, 1e-12);
        assert_close(v[1], r, 1e-12);
    }

    #[test]
    fn dominant_eigenvector_degenerate_error() {
        // |λ| = {1, 1}: ill-defined.
        let m = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(
            dominant_eigenvector(&m),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn dominant_eigenvector_matches_power_iteration() {
        // Independent oracle: 10^4 normalized power-iteration steps.
        let m = Matrix::from_rows(&[
            &[0.9, 0.2, 0.4, 0.1],
            &[0.2, 0.7, 0.3, 0.5],
            &[0.4, 0.3, 0.8, 0.2],
            &[0.1, 0.5, 0.2, 0.6],
        ]);
        let mut v = vec![1.0, 0.0, 0.0, 0.0];
        for _ in 0..10_000 {
            let w = m.matvec(&v).unwrap();
            let n = w.norm();
            v = w.iter().map(|x| x / n).collect();
        }
        if v[0] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        let got = dominant_eigenvector(&m).unwrap();
        for (g, w) in got.iter().zip(v.iter()) {
            assert_close(*g, *w, 1e-8);
        }
    }

    #[test]
    fn dominant_eigenvector_residual_small() {
        let m = Matrix::from_rows(&[&[0.6, 0.1, 0.3], &[0.1, 0.5, 0.2], &[0.3, 0.2, 0.7]]);
        let v = dominant_eigenvector(&m).unwrap();
        let (vals, _) = sym_eigen(&m).unwrap();
        let lmax = vals
            .iter()
            .cloned()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        let xv = m.matvec(&v).unwrap();
        let resid: f64 = xv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - lmax * b) * (a - lmax * b))
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-8, "residual {resid}");
    }

    #[test]
    fn operator_norm_examples() {
        assert_close(operator_norm(&Matrix::identity(3)).unwrap(), 1.0, 1e-9);
        let m = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, -5.0]]);
        assert_close(operator_norm(&m).unwrap(), 5.0, 1e-9);
    }

    #[test]
    fn operator_norm_cross_checked_with_eigen() {
        // σ_max(X) = √(max eigenvalue of XᵀX), eigenvalues from the Jacobi path.
        let m = Matrix::from_rows(&[
            &[0.1, 0.7, -0.3, 0.2, 0.5],
            &[-0.6, 0.4, 0.9, -0.1, 0.3],
            &[0.2, -0.8, 0.5, 0.6, -0.4],
            &[0.7, 0.1, -0.2, 0.9, 0.0],
            &[-0.3, 0.5, 0.4, -0.7, 0.8],
        ]);
        let xtx = m.transpose().matmul(&m).unwrap();
        let vals = sym_eigenvalues(&xtx).unwrap();
        let expected = vals[vals.len() - 1].sqrt();
        assert_close(operator_norm(&m).unwrap(), expected, 1e-8);
    }

    #[test]
    fn operator_norm_bounded_by_frobenius() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(operator_norm(&m).unwrap() <= m.frobenius_norm() + 1e-12);
    }

    #[test]
    fn vec_of_first_power_is_vec() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(mat_pow(&m, 1).unwrap().vec(), m.vec());
    }
}
