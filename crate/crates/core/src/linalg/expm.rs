//! Matrix exponential by scaling-and-squaring with a degree-13 Padé approximant.

use super::lu::lu_factor;
use super::matrix::Matrix;
use crate::error::Result;

// Padé-13 numerator/denominator coefficients b0..b13.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `eˣ` for square `x`: scale by `2⁻ˢ` until `‖X‖₁/2ˢ ≤ 1`, apply the
/// degree-13 Padé approximant, then square `s` times.
pub fn matrix_exp(x: &Matrix) -> Result<Matrix> {
    let n = x.rows();
    let norm = x.norm_1();
    let s = if norm > 1.0 {
        norm.log2().ceil() as u32
    } else {
        0
    };
    let a = x.scale(0.5f64.powi(s as i32));

    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a2.matmul(&a4)?;
    let ident = Matrix::identity(n);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut inner = a6.scale(PADE13[13]);
    inner.axpy(1.0, &a4.scale(PADE13[11]))?;
    inner.axpy(1.0, &a2.scale(PADE13[9]))?;
    let mut u = a6.matmul(&inner)?;
    u.axpy(PADE13[7], &a6)?;
    u.axpy(PADE13[5], &a4)?;
    u.axpy(PADE13[3], &a2)?;
    u.axpy(PADE13[1], &ident)?;
    let u = a.matmul(&u)?;

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut inner = a6.scale(PADE13[12]);
    inner.axpy(1.0, &a4.scale(PADE13[10]))?;
    inner.axpy(1.0, &a2.scale(PADE13[8]))?;
    let mut v = a6.matmul(&inner)?;
    v.axpy(PADE13[6], &a6)?;
    v.axpy(PADE13[4], &a4)?;
    v.axpy(PADE13[2], &a2)?;
    v.axpy(PADE13[0], &ident)?;

    // (V - U) F = (V + U)
    let denom = v.sub(&u)?;
    let numer = v.add(&u)?;
    let mut f = lu_factor(&denom)?.solve(&numer)?;

    for _ in 0..s {
        f = f.matmul(&f)?;
    }
    Ok(f)
}
