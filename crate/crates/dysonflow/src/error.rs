//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building models, integrating flows,
/// propagating states, or parsing configuration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix or state contains NaN or infinite entries.
    #[error("non-finite entries in {context}")]
    NonFinite { context: &'static str },

    /// A pivoted factorization met a pivot below its singularity threshold.
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// An iterative eigensolver exceeded its iteration cap.
    #[error("eigensolver failed to converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// A matrix required to be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// A metric operator failed the positive-definiteness check.
    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    MetricNotPositive { min_eigenvalue: f64 },

    /// A static generator does not satisfy the quasi-Hermiticity constraint
    /// under the supplied metric.
    #[error("operator is not quasi-Hermitian under the metric: residual {residual:.3e} exceeds {threshold:.3e}")]
    NotQuasiHermitian { residual: f64, threshold: f64 },

    /// The Dyson map lost invertibility during integration.
    #[error("Dyson map ill-conditioned at t = {time}: cond = {cond:.3e}")]
    IllConditionedDyson { time: f64, cond: f64 },

    /// A finite-difference step was zero or negative.
    #[error("finite-difference step must be positive (got {delta})")]
    DegenerateStep { delta: f64 },

    /// A configuration named a Hamiltonian family this build does not provide.
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),

    /// Random seed sampling could not satisfy the condition-number bound.
    #[error("random Dyson seed failed cond <= {cond_max} after {attempts} attempts")]
    CondBoundViolated { cond_max: f64, attempts: usize },

    /// An explicitly supplied Dyson seed is unusable.
    #[error("explicit Dyson seed rejected: {0}")]
    BadExplicitMatrix(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The configuration text could not be parsed at all.
    #[error("config parse error: {0}")]
    Parse(String),

    /// The configuration parsed but violates a semantic constraint.
    #[error("config validation error: {0}")]
    Validation(String),

    /// A convergence fit was requested with too few step sizes.
    #[error("convergence fit needs at least {needed} step sizes, got {given}")]
    InsufficientPoints { needed: usize, given: usize },

    /// Filesystem trouble while persisting or loading artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
