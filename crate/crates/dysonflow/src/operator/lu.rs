//! Pivoted LU factorization for dense complex matrices.

use num_complex::Complex64;

use super::{OperatorMatrix, StateVector};
use crate::error::{Error, Result};

/// Relative pivot threshold: a pivot below `1e-14 · ‖A‖_F` is treated as an
/// exactly singular matrix rather than divided through.
const PIVOT_REL_TOL: f64 = 1e-14;

pub(crate) struct LuFactors {
    dim: usize,
    // Combined L (unit lower, below diagonal) and U (upper) factors.
    lu: Vec<Complex64>,
    // perm[k] = original row index now sitting in position k.
    perm: Vec<usize>,
}

impl LuFactors {
    pub(crate) fn new(a: &OperatorMatrix) -> Result<Self> {
        if !a.all_finite() {
            return Err(Error::NonFinite {
                context: "LU factorization input",
            });
        }
        let n = a.dim();
        let mut lu = a.entries().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = PIVOT_REL_TOL * a.frobenius_norm().max(f64::MIN_POSITIVE);

        for k in 0..n {
            // Partial pivoting: largest magnitude in column k at or below row k.
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * n + k].norm();
            for i in (k + 1)..n {
                let mag = lu[i * n + k].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag < threshold {
                return Err(Error::SingularMatrix {
                    pivot: pivot_mag,
                    threshold,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let ukj = lu[k * n + j];
                    lu[i * n + j] -= factor * ukj;
                }
            }
        }
        Ok(Self { dim: n, lu, perm })
    }

    /// Solves for one right-hand side given as a raw column.
    fn solve_column(&self, rhs: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        // Apply permutation, then forward-substitute L y = P b.
        for k in 0..n {
            out[k] = rhs[self.perm[k]];
        }
        for k in 0..n {
            for j in 0..k {
                let l = self.lu[k * n + j];
                let yj = out[j];
                out[k] -= l * yj;
            }
        }
        // Back-substitute U x = y.
        for k in (0..n).rev() {
            for j in (k + 1)..n {
                let u = self.lu[k * n + j];
                let xj = out[j];
                out[k] -= u * xj;
            }
            out[k] /= self.lu[k * n + k];
        }
    }

    pub(crate) fn solve_vector(&self, rhs: &StateVector) -> Result<StateVector> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.solve_column(rhs.amplitudes(), &mut out);
        StateVector::new(out)
    }

    pub(crate) fn solve_matrix(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        let n = self.dim;
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        let mut solved = vec![Complex64::new(0.0, 0.0); n];
        let mut out = OperatorMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                column[i] = rhs.entry(i, j);
            }
            self.solve_column(&column, &mut solved);
            for i in 0..n {
                out.set_entry(i, j, solved[i]);
            }
        }
        if !out.all_finite() {
            return Err(Error::NonFinite {
                context: "linear solve",
            });
        }
        Ok(out)
    }
}
