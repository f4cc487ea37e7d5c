//! Dense complex operator algebra.
//!
//! Everything downstream — Hamiltonian families, Dyson-map flows, the three
//! propagation backends, the verification residuals — manipulates two value
//! types defined here: [`OperatorMatrix`] (a dense square complex matrix) and
//! [`StateVector`] (a dense complex column vector). Both are immutable in
//! spirit: operations return fresh values, so sharing across threads is safe.
//!
//! Conventions used throughout the crate:
//!
//! * storage is row-major, `entry(i, j)` is row `i`, column `j`;
//! * the adjoint `†` is transposition plus complex conjugation;
//! * eigenvalues are reported sorted by real part, then imaginary part;
//! * tolerances are relative to the Frobenius norm with a floor of one, so
//!   predicates behave sensibly near the zero matrix.
//!
//! The algebra is deliberately self-contained (factorizations, the matrix
//! exponential, and both eigensolver paths live in this module tree) so that
//! runs are bit-for-bit reproducible across machines: no BLAS dispatch, no
//! platform-dependent kernels. Target scale is desk-sized (dimension up to a
//! few dozen), where dense O(n³) algorithms are the right tool.

mod eig;
mod expm;
mod lu;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex64>,
}

/// Row form of a state under a metric: the result of `⟨Φ|Θ`.
///
/// Applying a covector to a ket reproduces the metric inner product exactly
/// (same arithmetic, same rounding).
#[derive(Clone, PartialEq)]
pub struct Covector {
    entries: Vec<Complex64>,
}

/// Eigenvalues of an operator, sorted by real part then imaginary part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<ComplexPair>,
}

type ComplexPair = (f64, f64);

impl OperatorMatrix {
    /// The zero matrix.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// The identity matrix.
    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex64::new(1.0, 0.0))
    }

    /// `z` times the identity.
    pub fn scalar(dim: usize, z: Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = z;
        }
        m
    }

    /// Builds a matrix from rows, validating shape and finiteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Validation(
                "matrix dimension must be positive".into(),
            ));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        if !m.all_finite() {
            return Err(Error::NonFinite {
                context: "matrix construction",
            });
        }
        Ok(m)
    }

    /// Builds a matrix entry-wise from a closure, validating finiteness.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        if !m.all_finite() {
            return Err(Error::NonFinite {
                context: "matrix construction",
            });
        }
        Ok(m)
    }

    /// Builds a diagonal matrix from the given diagonal entries.
    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 {
            return Err(Error::Validation(
                "matrix dimension must be positive".into(),
            ));
        }
        let mut m = Self::zeros(dim);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * dim + i] = z;
        }
        if !m.all_finite() {
            return Err(Error::NonFinite {
                context: "matrix construction",
            });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    /// Overwrites one entry. Mostly useful for fault injection in tests and
    /// diagnostics; ordinary code builds matrices whole.
    pub fn set_entry(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
            }
        }
        out
    }

    /// Matrix product `self · rhs`. Panics on dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul: dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += a * rrow[j];
                }
            }
        }
        out
    }

    /// Commutator `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// Scales every entry by a complex factor.
    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    /// Scales every entry by a real factor.
    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Applies the matrix to a vector. Panics on dimension mismatch.
    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.dim, v.dim(), "apply: dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let row = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += row[j] * v.data[j];
            }
            out[i] = acc;
        }
        StateVector { data: out }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Frobenius distance to the adjoint, `‖A − A†‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// True iff `‖A − A†‖_F ≤ tol · max(1, ‖A‖_F)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.frobenius_norm().max(1.0)
    }

    /// Positive-definiteness of a (nominally Hermitian) matrix.
    ///
    /// The matrix must be Hermitian within `1e-10` relative defect, otherwise
    /// [`Error::NotHermitian`] is returned. The predicate itself accepts the
    /// matrix when every eigenvalue of its Hermitian part exceeds
    /// `−1e−12·‖A‖_F`, i.e. it tolerates roundoff-level negative leakage.
    pub fn is_positive_definite(&self) -> Result<bool> {
        const HERM_TOL: f64 = 1e-10;
        let defect = self.hermitian_defect();
        let scale = self.frobenius_norm().max(1.0);
        if defect > HERM_TOL * scale {
            return Err(Error::NotHermitian {
                defect: defect / scale,
                tol: HERM_TOL,
            });
        }
        let eigs = eig::hermitian_eigenvalues(&self.hermitian_part())?;
        let floor = -1e-12 * self.frobenius_norm();
        Ok(eigs.iter().all(|&x| x > floor))
    }

    /// Matrix inverse via pivoted LU.
    pub fn inverse(&self) -> Result<Self> {
        lu::LuFactors::new(self)?.solve_matrix(&Self::identity(self.dim))
    }

    /// Solves `self · X = rhs` for a matrix right-hand side.
    pub fn solve_matrix(&self, rhs: &Self) -> Result<Self> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        lu::LuFactors::new(self)?.solve_matrix(rhs)
    }

    /// Solves `self · x = rhs` for a vector right-hand side.
    pub fn solve_vector(&self, rhs: &StateVector) -> Result<StateVector> {
        if rhs.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim(),
            });
        }
        lu::LuFactors::new(self)?.solve_vector(rhs)
    }

    /// Matrix exponential `e^A` by scaling-and-squaring with a degree-13
    /// diagonal rational approximant.
    pub fn exp(&self) -> Result<Self> {
        expm::mat_exp(self)
    }

    /// Eigenvalues, sorted by real part then imaginary part.
    ///
    /// Dispatches to a dedicated Hermitian path (unitary tridiagonalization
    /// followed by implicit QL) when the matrix is Hermitian within `1e-10`,
    /// and to a general path (Hessenberg reduction followed by shifted
    /// complex QR) otherwise.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let mut eigenvalues = if self.is_hermitian(1e-10) {
            eig::hermitian_eigenvalues(&self.hermitian_part())?
                .into_iter()
                .map(|x| (x, 0.0))
                .collect::<Vec<_>>()
        } else {
            eig::general_eigenvalues(self)?
                .into_iter()
                .map(|z| (z.re, z.im))
                .collect::<Vec<_>>()
        };
        eigenvalues.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Spectrum { eigenvalues })
    }

    /// Singular values in descending order (square roots of the eigenvalues
    /// of `A†A`).
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let gram = self.adjoint().matmul(self).hermitian_part();
        let mut vals = eig::hermitian_eigenvalues(&gram)?;
        for v in &mut vals {
            *v = v.max(0.0).sqrt();
        }
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(vals)
    }

    /// Two-norm condition number `σ_max / σ_min` (infinite when singular).
    pub fn condition_number(&self) -> Result<f64> {
        let sv = self.singular_values()?;
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        if smin == 0.0 {
            Ok(f64::INFINITY)
        } else {
            Ok(smax / smin)
        }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.singular_values()?[0])
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OperatorMatrix(dim = {})", self.dim)?;
        for i in 0..self.dim {
            write!(f, "  [")?;
            for j in 0..self.dim {
                let z = self.entry(i, j);
                write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "add: dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "sub: dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs)
    }
}

impl Mul<Complex64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, z: Complex64) -> OperatorMatrix {
        self.scale(z)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_real(-1.0)
    }
}

impl StateVector {
    /// Builds a state from amplitudes, validating finiteness.
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Validation("state dimension must be positive".into()));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "state construction",
            });
        }
        Ok(Self { data })
    }

    /// The zero vector.
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Canonical basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut v = Self::zeros(dim);
        v.data[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.data[k]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean (Dirac) norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Dirac inner product `⟨self|other⟩ = self† · other`.
    pub fn dirac_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    /// `self + z·other`.
    pub fn axpy(&self, z: Complex64, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + z * b)
                .collect(),
        }
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[")?;
        for z in &self.data {
            write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: Self) -> StateVector {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: Self) -> StateVector {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl Covector {
    pub(crate) fn from_entries(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Applies the row form to a ket.
    pub fn apply(&self, ket: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), ket.dim(), "covector apply: dimension mismatch");
        self.entries
            .iter()
            .zip(ket.amplitudes())
            .map(|(r, k)| r * k)
            .sum()
    }
}

impl fmt::Debug for Covector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Covector[")?;
        for z in &self.entries {
            write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Sorted eigenvalues.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect()
    }

    /// Largest element-wise distance to another sorted spectrum.
    pub fn max_abs_difference(&self, other: &Spectrum) -> f64 {
        assert_eq!(self.len(), other.len(), "spectra of different sizes");
        self.eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| Complex64::new(a.0 - b.0, a.1 - b.1).norm())
            .fold(0.0, f64::max)
    }
}

// Wire encoding shared by every file format in the crate: a complex scalar is
// a two-element array [re, im]; a matrix is a row-major array of rows.

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<ComplexPair>> = (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| (z.re, z.im)).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<ComplexPair>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        OperatorMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let amps: Vec<ComplexPair> = self.data.iter().map(|z| (z.re, z.im)).collect();
        amps.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let amps: Vec<ComplexPair> = Vec::deserialize(deserializer)?;
        StateVector::new(
            amps.into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn adjoint_of_real_symmetric_is_identity_map() {
        let a = OperatorMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn adjoint_direct_definition() {
        let a = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let adj = a.adjoint();
        assert_eq!(adj.entry(0, 0), c(0.0, 0.0));
        assert_eq!(adj.entry(0, 1), c(0.0, 0.0));
        assert_eq!(adj.entry(1, 0), c(0.0, -1.0));
        assert_eq!(adj.entry(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn inverse_of_identity() {
        let eye = OperatorMatrix::identity(3);
        let inv = eye.inverse().unwrap();
        assert!((&inv - &eye).frobenius_norm() < 1e-15);
    }

    #[test]
    fn inverse_of_diagonal() {
        let a = OperatorMatrix::diagonal(&[c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        let inv = a.inverse().unwrap();
        assert!((inv.entry(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((inv.entry(1, 1) - c(0.25, 0.0)).norm() < 1e-15);
        assert!(inv.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn inverse_of_rank_one_fails() {
        let a = OperatorMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        match a.inverse() {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_predicate_cases() {
        let eye = OperatorMatrix::identity(2);
        assert!(eye.is_hermitian(1e-12));

        let nilpotent = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(!nilpotent.is_hermitian(1e-12));

        // Off-diagonal pair perturbed by (0, 1e-13): inside a 1e-10 band.
        let nearly = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 1e-13), c(1e-13, 0.0)],
        ])
        .unwrap();
        assert!(nearly.is_hermitian(1e-10));
    }

    #[test]
    fn positive_definiteness_cases() {
        assert!(OperatorMatrix::identity(3).is_positive_definite().unwrap());
        let indef = OperatorMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(!indef.is_positive_definite().unwrap());

        let nonherm = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        match nonherm.is_positive_definite() {
            Err(Error::NotHermitian { .. }) => {}
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_of_diagonal_is_sorted() {
        let a = OperatorMatrix::diagonal(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let s = a.spectrum().unwrap();
        let eigs = s.eigenvalues();
        assert!((eigs[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((eigs[1] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((eigs[2] - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spectrum_of_pauli_x() {
        let a = OperatorMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let eigs = a.spectrum().unwrap().eigenvalues();
        assert!((eigs[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((eigs[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn state_vector_basics() {
        let v = StateVector::basis(3, 1);
        assert_eq!(v.dim(), 3);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        let w = v.scale(c(0.0, 2.0));
        assert!((w.norm() - 2.0).abs() < 1e-15);
        assert!((v.dirac_inner(&w) - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn non_finite_construction_rejected() {
        let bad = OperatorMatrix::from_rows(&[
            vec![c(f64::NAN, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        assert!(matches!(bad, Err(Error::NonFinite { .. })));
        let bad_state = StateVector::new(vec![c(f64::INFINITY, 0.0)]);
        assert!(matches!(bad_state, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn serde_round_trip_is_exact() {
        let a = OperatorMatrix::from_rows(&[
            vec![c(0.1, -0.7), c(1.0 / 3.0, 2.0)],
            vec![c(-5.5e-13, 0.25), c(0.0, -1.0)],
        ])
        .unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let back: OperatorMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }
}
