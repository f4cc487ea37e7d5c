//! Hamiltonian families and Dyson seeds.
//!
//! A [`HamiltonianFamily`] is a time-parameterized Hermitian matrix together
//! with its exact analytic derivative. Four kinds are provided:
//!
//! * `constant` — a fixed Hermitian matrix (the stationary baseline);
//! * `diagonal-poly` — real polynomials on the diagonal, which commute at all
//!   times and therefore admit a closed-form Dyson flow, useful as an oracle;
//! * `rabi` — the driven two-level system with a cosine coupling;
//! * `poly-matrix` — a polynomial in `t` with Hermitian matrix coefficients,
//!   the generic non-commuting case.
//!
//! A [`DysonSeed`] fixes the initial data of the flow: the map `Ω(0)` and the
//! coefficient `σ(0)`. Seeds come from [`SeedRecipe`]s, which are pure
//! functions of `(recipe, dim, rng_seed)` so that every run is reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// Largest condition number accepted for an explicit `Ω(0)`.
pub const SEED_COND_BOUND: f64 = 1e6;

/// Attempts allowed when sampling a random seed under a condition bound.
const RANDOM_SEED_ATTEMPTS: usize = 100;

/// Real polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                context: "polynomial coefficients",
            });
        }
        Ok(Self { coeffs })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial { coeffs }
    }
}

/// Time-parameterized Hermitian Hamiltonian with analytic derivative.
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianFamily {
    Constant {
        matrix: OperatorMatrix,
    },
    DiagonalPoly {
        diagonal: Vec<Polynomial>,
    },
    Rabi {
        epsilon: f64,
        coupling: f64,
        frequency: f64,
    },
    PolyMatrix {
        coefficients: Vec<OperatorMatrix>,
    },
}

impl HamiltonianFamily {
    /// Fixed Hermitian matrix; rejects non-Hermitian input.
    pub fn constant(matrix: OperatorMatrix) -> Result<Self> {
        if !matrix.is_hermitian(1e-12) {
            return Err(Error::NotHermitian {
                defect: matrix.hermitian_defect() / matrix.frobenius_norm().max(1.0),
                tol: 1e-12,
            });
        }
        Ok(Self::Constant { matrix })
    }

    /// Diagonal matrix of real polynomials in `t`.
    pub fn diagonal_poly(diagonal: Vec<Polynomial>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::Validation(
                "diagonal-poly family needs at least one entry".into(),
            ));
        }
        Ok(Self::DiagonalPoly { diagonal })
    }

    /// Driven two-level system:
    /// `h(t) = [[ε, v cos(ωt)], [v cos(ωt), −ε]]`.
    pub fn rabi(epsilon: f64, coupling: f64, frequency: f64) -> Self {
        Self::Rabi {
            epsilon,
            coupling,
            frequency,
        }
    }

    /// Polynomial in `t` with Hermitian matrix coefficients (ascending powers).
    pub fn poly_matrix(coefficients: Vec<OperatorMatrix>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Validation(
                "poly-matrix family needs at least one coefficient".into(),
            ));
        }
        let dim = coefficients[0].dim();
        for (k, c) in coefficients.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            if !c.is_hermitian(1e-12) {
                return Err(Error::Validation(format!(
                    "poly-matrix coefficient {k} is not Hermitian"
                )));
            }
        }
        Ok(Self::PolyMatrix { coefficients })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant { matrix } => matrix.dim(),
            Self::DiagonalPoly { diagonal } => diagonal.len(),
            Self::Rabi { .. } => 2,
            Self::PolyMatrix { coefficients } => coefficients[0].dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::DiagonalPoly { .. } => "diagonal-poly",
            Self::Rabi { .. } => "rabi",
            Self::PolyMatrix { .. } => "poly-matrix",
        }
    }

    /// `h(t)`. Panics on a non-finite `t`.
    pub fn hamiltonian(&self, t: f64) -> OperatorMatrix {
        assert!(t.is_finite(), "hamiltonian evaluated at non-finite time");
        match self {
            Self::Constant { matrix } => matrix.clone(),
            Self::DiagonalPoly { diagonal } => {
                let entries: Vec<Complex64> = diagonal
                    .iter()
                    .map(|p| Complex64::new(p.eval(t), 0.0))
                    .collect();
                OperatorMatrix::diagonal(&entries).expect("finite by construction")
            }
            Self::Rabi {
                epsilon,
                coupling,
                frequency,
            } => {
                let off = coupling * (frequency * t).cos();
                OperatorMatrix::from_rows(&[
                    vec![Complex64::new(*epsilon, 0.0), Complex64::new(off, 0.0)],
                    vec![Complex64::new(off, 0.0), Complex64::new(-epsilon, 0.0)],
                ])
                .expect("finite by construction")
            }
            Self::PolyMatrix { coefficients } => {
                let mut acc = OperatorMatrix::zeros(self.dim());
                let mut power = 1.0;
                for c in coefficients {
                    acc = &acc + &c.scale_real(power);
                    power *= t;
                }
                acc
            }
        }
    }

    /// The exact analytic derivative `ḣ(t)`. Panics on a non-finite `t`.
    pub fn hamiltonian_dot(&self, t: f64) -> OperatorMatrix {
        assert!(
            t.is_finite(),
            "hamiltonian_dot evaluated at non-finite time"
        );
        match self {
            Self::Constant { matrix } => OperatorMatrix::zeros(matrix.dim()),
            Self::DiagonalPoly { diagonal } => {
                let entries: Vec<Complex64> = diagonal
                    .iter()
                    .map(|p| Complex64::new(p.derivative().eval(t), 0.0))
                    .collect();
                OperatorMatrix::diagonal(&entries).expect("finite by construction")
            }
            Self::Rabi {
                coupling,
                frequency,
                ..
            } => {
                let off = -coupling * frequency * (frequency * t).sin();
                OperatorMatrix::from_rows(&[
                    vec![Complex64::new(0.0, 0.0), Complex64::new(off, 0.0)],
                    vec![Complex64::new(off, 0.0), Complex64::new(0.0, 0.0)],
                ])
                .expect("finite by construction")
            }
            Self::PolyMatrix { coefficients } => {
                let mut acc = OperatorMatrix::zeros(self.dim());
                let mut power = 1.0;
                for (k, c) in coefficients.iter().enumerate().skip(1) {
                    acc = &acc + &c.scale_real(k as f64 * power);
                    power *= t;
                }
                acc
            }
        }
    }
}

/// Initial data for the Dyson flow: the map `Ω(0)` and the coefficient
/// `σ(0)`. `Ω(0)` must be invertible and reasonably conditioned; `σ(0)` is an
/// unconstrained complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DysonSeed {
    omega0: OperatorMatrix,
    sigma0: OperatorMatrix,
}

impl DysonSeed {
    pub fn new(omega0: OperatorMatrix, sigma0: OperatorMatrix) -> Result<Self> {
        if sigma0.dim() != omega0.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega0.dim(),
                found: sigma0.dim(),
            });
        }
        if !(omega0.all_finite() && sigma0.all_finite()) {
            return Err(Error::BadExplicitMatrix(
                "seed matrices contain non-finite entries".into(),
            ));
        }
        if omega0.inverse().is_err() {
            return Err(Error::BadExplicitMatrix("omega0 is singular".into()));
        }
        let cond = omega0.condition_number()?;
        if !cond.is_finite() || cond > SEED_COND_BOUND {
            return Err(Error::BadExplicitMatrix(format!(
                "cond(omega0) = {cond:.3e} exceeds the bound {SEED_COND_BOUND:.1e}"
            )));
        }
        Ok(Self { omega0, sigma0 })
    }

    pub fn dim(&self) -> usize {
        self.omega0.dim()
    }

    pub fn omega0(&self) -> &OperatorMatrix {
        &self.omega0
    }

    pub fn sigma0(&self) -> &OperatorMatrix {
        &self.sigma0
    }
}

/// How to build a [`DysonSeed`].
#[derive(Clone, Debug, PartialEq)]
pub enum SeedRecipe {
    /// `Ω(0) = I`, `σ(0) = 0`: the trivial map.
    Identity,
    /// `Ω(0) = I`, `σ(0) = s·I`. A non-real `s` makes `Ω(t)` non-unitary.
    Scalar(Complex64),
    /// Random invertible `Ω(0)` with `cond ≤ cond_max` (rescaled to unit
    /// spectral norm) and a random complex `σ(0)`.
    Random { cond_max: f64 },
    /// Explicit matrices, validated on construction.
    Explicit {
        omega0: OperatorMatrix,
        sigma0: OperatorMatrix,
    },
}

impl SeedRecipe {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Scalar(_) => "scalar",
            Self::Random { .. } => "random",
            Self::Explicit { .. } => "explicit",
        }
    }

    /// Builds the seed. Deterministic for a fixed `(recipe, dim, rng_seed)`.
    pub fn build(&self, dim: usize, rng_seed: u64) -> Result<DysonSeed> {
        match self {
            Self::Identity => {
                DysonSeed::new(OperatorMatrix::identity(dim), OperatorMatrix::zeros(dim))
            }
            Self::Scalar(s) => DysonSeed::new(
                OperatorMatrix::identity(dim),
                OperatorMatrix::scalar(dim, *s),
            ),
            Self::Random { cond_max } => build_random_seed(dim, *cond_max, rng_seed),
            Self::Explicit { omega0, sigma0 } => {
                if omega0.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: omega0.dim(),
                    });
                }
                DysonSeed::new(omega0.clone(), sigma0.clone())
            }
        }
    }
}

/// Draws `Ω(0)` entries uniformly from the complex square `[-1,1]²` until the
/// condition bound is met, then rescales to unit spectral norm; `σ(0)`
/// entries come from `[-1/4, 1/4]²` so that desk-scale flows stay tame.
fn build_random_seed(dim: usize, cond_max: f64, rng_seed: u64) -> Result<DysonSeed> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..RANDOM_SEED_ATTEMPTS {
        let candidate = random_matrix(&mut rng, dim, 1.0);
        let sv = candidate.singular_values()?;
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        if smin <= 0.0 || smax / smin > cond_max {
            continue;
        }
        let omega0 = candidate.scale_real(1.0 / smax);
        let sigma0 = random_matrix(&mut rng, dim, 0.25);
        return DysonSeed::new(omega0, sigma0);
    }
    Err(Error::CondBoundViolated {
        cond_max,
        attempts: RANDOM_SEED_ATTEMPTS,
    })
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |_, _| {
        Complex64::new(
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        )
    })
    .expect("finite by construction")
}
