//! The three evolution backends.
//!
//! * [`evolve_physical`] integrates the textbook equation
//!   `i∂ₜφ = h(t)φ` with RK4 — the slow, reference route.
//! * [`evolve_cryptounitary`] uses the closed form of the friendly picture:
//!   `Φ(t) = e^{−iGt} Φ(0)` with the constant generator, reconstructing the
//!   physical state as `φ(t) = Ω(t) Φ(t)` on the flow grid. Each node is
//!   evaluated by a fresh matrix exponential, so the friendly picture carries
//!   no stepping error at all.
//! * [`evolve_static_crypto`] covers the stationary quasi-Hermitian picture:
//!   `Φ(t) = e^{−iHt} Φ(0)` for a time-independent `H` obeying the
//!   constraint `H†Θ = ΘH`.
//!
//! Dual-picture bookkeeping lives in [`StateTriple`]: the physical state
//! `φ`, the friendly ket `Φ = Ω⁻¹φ`, and the ketket `Φ⟩⟩ = Ω†φ = ΘΦ`, which
//! evolves under `G†` ([`evolve_ketket`]). The metric inner product
//! [`physical_inner`] and its row form [`theta_bra`] express exactly the
//! quantities the apparently non-unitary evolution conserves.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{FlowTrace, Grid};
use crate::model::HamiltonianFamily;
use crate::operator::{Covector, OperatorMatrix, StateVector};

/// One state seen from all three sides.
#[derive(Clone, Debug)]
pub struct StateTriple {
    /// `φ`, the state in the physical space.
    pub physical: StateVector,
    /// `Φ = Ω⁻¹ φ`, the friendly ket.
    pub friendly: StateVector,
    /// `Φ⟩⟩ = Ω† φ = Θ Φ`, the ketket dual.
    pub ketket: StateVector,
}

/// A propagated trajectory with per-node diagnostics.
#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    times: Vec<f64>,
    states: Vec<StateTriple>,
    /// Plain Dirac norm of the friendly ket `‖Φ(t_k)‖`.
    dirac_norms: Vec<f64>,
    /// Dirac norm of the physical state `‖φ(t_k)‖`.
    physical_norms: Vec<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateTriple] {
        &self.states
    }

    pub fn dirac_norms(&self) -> &[f64] {
        &self.dirac_norms
    }

    pub fn physical_norms(&self) -> &[f64] {
        &self.physical_norms
    }

    fn push(&mut self, t: f64, triple: StateTriple) {
        self.dirac_norms.push(triple.friendly.norm());
        self.physical_norms.push(triple.physical.norm());
        self.times.push(t);
        self.states.push(triple);
    }

    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            dirac_norms: Vec::with_capacity(n),
            physical_norms: Vec::with_capacity(n),
        }
    }

    /// Assembles a trace from raw parts (used when re-reading persisted
    /// records).
    pub fn from_parts(times: Vec<f64>, states: Vec<StateTriple>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Validation(
                "evolution trace arrays of unequal length".into(),
            ));
        }
        let mut trace = Self::with_capacity(times.len());
        for (t, s) in times.into_iter().zip(states) {
            trace.push(t, s);
        }
        Ok(trace)
    }
}

/// Splits a physical state into its three pictures under a given map.
pub fn map_states(phi: &StateVector, omega: &OperatorMatrix) -> Result<StateTriple> {
    if phi.dim() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega.dim(),
            found: phi.dim(),
        });
    }
    let friendly = omega.solve_vector(phi)?;
    let ketket = omega.adjoint().apply(phi);
    Ok(StateTriple {
        physical: phi.clone(),
        friendly,
        ketket,
    })
}

/// Reference backend: RK4 on `i∂ₜφ = h(t)φ`.
///
/// The returned triples use the trivial map (`Ω = I`), so all three pictures
/// coincide; pair the result with a flow to compare against the friendly
/// route.
pub fn evolve_physical(
    family: &HamiltonianFamily,
    phi0: &StateVector,
    grid: &Grid,
) -> Result<EvolutionTrace> {
    if phi0.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: phi0.dim(),
        });
    }
    let steps = grid.steps()?;
    let dt = grid.dt;
    let minus_i = Complex64::new(0.0, -1.0);

    let rhs = |t: f64, v: &StateVector| family.hamiltonian(t).apply(v).scale(minus_i);

    let mut phi = phi0.clone();
    let mut trace = EvolutionTrace::with_capacity(steps + 1);
    trace.push(0.0, trivial_triple(&phi));

    for k in 0..steps {
        let t = k as f64 * dt;
        let half = 0.5 * dt;
        let half_c = Complex64::new(half, 0.0);
        let full_c = Complex64::new(dt, 0.0);

        let k1 = rhs(t, &phi);
        let k2 = rhs(t + half, &phi.axpy(half_c, &k1));
        let k3 = rhs(t + half, &phi.axpy(half_c, &k2));
        let k4 = rhs(t + dt, &phi.axpy(full_c, &k3));

        let mut incr = k1;
        incr = incr.axpy(Complex64::new(2.0, 0.0), &k2);
        incr = incr.axpy(Complex64::new(2.0, 0.0), &k3);
        incr = &incr + &k4;
        phi = phi.axpy(Complex64::new(dt / 6.0, 0.0), &incr);

        if !phi.all_finite() {
            return Err(Error::NonFinite {
                context: "physical propagation",
            });
        }
        trace.push((k + 1) as f64 * dt, trivial_triple(&phi));
    }
    Ok(trace)
}

fn trivial_triple(phi: &StateVector) -> StateTriple {
    StateTriple {
        physical: phi.clone(),
        friendly: phi.clone(),
        ketket: phi.clone(),
    }
}

/// Closed-form backend: `Φ(t_k) = e^{−iG t_k} Φ(0)` with
/// `Φ(0) = Ω(0)⁻¹ φ(0)`, reconstructed as `φ(t_k) = Ω(t_k) Φ(t_k)` on the
/// flow grid.
pub fn evolve_cryptounitary(
    generator: &OperatorMatrix,
    flow: &FlowTrace,
    phi0: &StateVector,
) -> Result<EvolutionTrace> {
    if phi0.dim() != flow.dim() {
        return Err(Error::DimensionMismatch {
            expected: flow.dim(),
            found: phi0.dim(),
        });
    }
    if generator.dim() != flow.dim() {
        return Err(Error::DimensionMismatch {
            expected: flow.dim(),
            found: generator.dim(),
        });
    }
    let friendly0 = flow.omega(0).solve_vector(phi0)?;
    let minus_i = Complex64::new(0.0, -1.0);

    let mut trace = EvolutionTrace::with_capacity(flow.len());
    for (k, &t) in flow.times().iter().enumerate() {
        let propagator = generator.scale(minus_i * t).exp()?;
        let friendly = propagator.apply(&friendly0);
        let physical = flow.omega(k).apply(&friendly);
        let ketket = flow.omega(k).adjoint().apply(&physical);
        if !physical.all_finite() {
            return Err(Error::NonFinite {
                context: "crypto-unitary propagation",
            });
        }
        trace.push(
            t,
            StateTriple {
                physical,
                friendly,
                ketket,
            },
        );
    }
    Ok(trace)
}

/// Ketket trajectory `Φ⟩⟩(t) = e^{−iG†t} Θ(0) Φ(0)`, the closed-form dual of
/// [`evolve_cryptounitary`].
pub fn evolve_ketket(
    generator: &OperatorMatrix,
    theta0: &OperatorMatrix,
    phi_friendly0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    require_metric(theta0)?;
    if phi_friendly0.dim() != theta0.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta0.dim(),
            found: phi_friendly0.dim(),
        });
    }
    let ketket0 = theta0.apply(phi_friendly0);
    let minus_i = Complex64::new(0.0, -1.0);
    let adjoint = generator.adjoint();
    times
        .iter()
        .map(|&t| Ok(adjoint.scale(minus_i * t).exp()?.apply(&ketket0)))
        .collect()
}

/// Metric inner product `⟨Φ₁|Θ|Φ₂⟩`, the physical overlap expressed in the
/// friendly space.
pub fn physical_inner(
    phi_friendly1: &StateVector,
    phi_friendly2: &StateVector,
    theta: &OperatorMatrix,
) -> Result<Complex64> {
    require_metric(theta)?;
    Ok(theta_bra(phi_friendly1, theta).apply(phi_friendly2))
}

/// The metric-dependent conjugation `|Φ⟩ → ⟨Φ|Θ`, returned as a row form.
///
/// Applying the result to a ket `|Ψ⟩` reproduces
/// [`physical_inner`]`(Φ, Ψ, Θ)` exactly — same arithmetic, same rounding.
pub fn theta_bra(phi_friendly: &StateVector, theta: &OperatorMatrix) -> Covector {
    assert_eq!(
        phi_friendly.dim(),
        theta.dim(),
        "theta_bra: dimension mismatch"
    );
    // Φ†Θ = (Θ†Φ)†; for Hermitian Θ the row is the conjugate of ΘΦ.
    let column = theta.adjoint().apply(phi_friendly);
    Covector::from_entries(column.amplitudes().iter().map(|z| z.conj()).collect())
}

/// Both sides of the stationary overlap identity, evaluated independently.
#[derive(Clone, Copy, Debug)]
pub struct OverlapComparison {
    /// `(e^{−iHt}Φ₁)† (e^{−iHt}Φ₂)`: the Dirac overlap after evolution.
    pub lhs: Complex64,
    /// `Φ₁† e^{i(H†−H)t} Φ₂`: the single-exponential expression.
    pub rhs: Complex64,
}

/// Evaluates the Dirac overlap of two states evolved under a stationary `H`
/// (lhs) and the single-exponential expression `Φ₁† e^{i(H†−H)t} Φ₂` (rhs).
///
/// For Hermitian `H` both sides equal `Φ₁†Φ₂`. For non-normal `H` the two
/// sides genuinely differ (`e^{iH†t} e^{−iHt} ≠ e^{i(H†−H)t}` unless `H` and
/// `H†` commute); this function reports both so the discrepancy can be
/// inspected rather than assumed away.
pub fn static_overlap_drift(
    h_friendly: &OperatorMatrix,
    phi1: &StateVector,
    phi2: &StateVector,
    t: f64,
) -> Result<OverlapComparison> {
    let minus_i = Complex64::new(0.0, -1.0);
    let i = Complex64::new(0.0, 1.0);
    let propagator = h_friendly.scale(minus_i * t).exp()?;
    let lhs = propagator.apply(phi1).dirac_inner(&propagator.apply(phi2));
    let difference = &h_friendly.adjoint() - h_friendly;
    let rhs_op = difference.scale(i * t).exp()?;
    let rhs = phi1.dirac_inner(&rhs_op.apply(phi2));
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(Error::NonFinite {
            context: "overlap comparison",
        });
    }
    Ok(OverlapComparison { lhs, rhs })
}

/// Residual threshold for the quasi-Hermiticity precondition of
/// [`evolve_static_crypto`].
pub const QUASI_HERMITICITY_TOL: f64 = 1e-8;

/// Stationary crypto-Hermitian backend: `Φ(t) = e^{−iHt} Φ(0)` for a
/// time-independent `H` satisfying `H†Θ = ΘH` under the supplied metric.
///
/// The constraint is enforced up front: if
/// `‖H†Θ − ΘH‖_F > 1e−8 · ‖Θ‖_F` the pair is rejected as
/// [`Error::NotQuasiHermitian`]. When it holds, the metric inner product of
/// the evolved states is conserved exactly (up to roundoff).
pub fn evolve_static_crypto(
    h_friendly: &OperatorMatrix,
    theta: &OperatorMatrix,
    phi_friendly0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    let residual =
        (&h_friendly.adjoint().matmul(theta) - &theta.matmul(h_friendly)).frobenius_norm();
    let threshold = QUASI_HERMITICITY_TOL * theta.frobenius_norm();
    if residual > threshold {
        return Err(Error::NotQuasiHermitian {
            residual,
            threshold,
        });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    times
        .iter()
        .map(|&t| Ok(h_friendly.scale(minus_i * t).exp()?.apply(phi_friendly0)))
        .collect()
}

fn require_metric(theta: &OperatorMatrix) -> Result<()> {
    match theta.is_positive_definite() {
        Ok(true) => Ok(()),
        Ok(false) => {
            let min = theta
                .spectrum()?
                .eigenvalues()
                .first()
                .map_or(0.0, |z| z.re);
            Err(Error::MetricNotPositive {
                min_eigenvalue: min,
            })
        }
        Err(Error::NotHermitian { .. }) => Err(Error::MetricNotPositive {
            min_eigenvalue: f64::NAN,
        }),
        Err(e) => Err(e),
    }
}
