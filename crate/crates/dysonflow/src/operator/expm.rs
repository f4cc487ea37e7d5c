//! Matrix exponential: scaling-and-squaring with the degree-13 diagonal
//! rational (Padé) approximant.
//!
//! The generators this crate exponentiates are generally non-normal, so the
//! implementation sticks to the plain fixed-degree scheme: scale the input
//! below the degree-13 accuracy radius, evaluate the [13/13] approximant with
//! one linear solve, square back up. Double precision gives relative errors
//! at the 1e-13 level for Frobenius norms up to about 1e2.

use num_complex::Complex64;

use super::OperatorMatrix;
use crate::error::{Error, Result};

/// Numerator coefficients of the [13/13] diagonal approximant to `e^x`
/// (the denominator uses the same coefficients with alternating signs).
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

/// One-norm radius within which the degree-13 approximant is accurate to
/// unit roundoff.
const THETA13: f64 = 5.371920351148152;

pub(crate) fn mat_exp(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !a.all_finite() {
        return Err(Error::NonFinite {
            context: "matrix exponential input",
        });
    }
    let n = a.dim();
    let norm = a.one_norm();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let eye = OperatorMatrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    let real = |x: f64| Complex64::new(x, 0.0);

    // U = A [ A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I ]
    let inner_u =
        &(&(&a6 * real(PADE13[13])) + &(&a4 * real(PADE13[11]))) + &(&a2 * real(PADE13[9]));
    let u_poly = &(&(&a6.matmul(&inner_u) + &(&a6 * real(PADE13[7])))
        + &(&(&a4 * real(PADE13[5])) + &(&a2 * real(PADE13[3]))))
        + &(&eye * real(PADE13[1]));
    let u = scaled.matmul(&u_poly);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v =
        &(&(&a6 * real(PADE13[12])) + &(&a4 * real(PADE13[10]))) + &(&a2 * real(PADE13[8]));
    let v = &(&(&a6.matmul(&inner_v) + &(&a6 * real(PADE13[6])))
        + &(&(&a4 * real(PADE13[4])) + &(&a2 * real(PADE13[2]))))
        + &(&eye * real(PADE13[0]));

    // (V - U) R = (V + U)
    let mut result = (&v - &u).solve_matrix(&(&v + &u))?;
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.all_finite() {
        return Err(Error::NonFinite {
            context: "matrix exponential result",
        });
    }
    Ok(result)
}
