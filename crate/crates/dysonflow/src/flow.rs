//! Reconstruction of the time-dependent Dyson map.
//!
//! Requiring the friendly-space generator `G(t) = H(t) − Σ(t)` to be constant
//! in time turns the map `Ω(t)` into the solution of a coupled pair of linear
//! operator ODEs. With `σ = i Ω̇ Ω⁻¹`:
//!
//! ```text
//! σ̇(t) = ḣ(t) − i [h(t), σ(t)]        (constancy of G)
//! Ω̇(t) = −i σ(t) Ω(t)                 (definition of σ)
//! ```
//!
//! [`integrate_flow`] advances both with classical fixed-step RK4 on a
//! uniform grid, watching the conditioning of `Ω` as it goes.
//! [`derived_operators`] then assembles, at any grid node, the transformed
//! Hamiltonian `H = Ω⁻¹ h Ω`, the coupling `Σ = Ω⁻¹ σ Ω`, the metric
//! `Θ = Ω†Ω`, and the instantaneous generator `G = H − Σ`. If the
//! integration is faithful, `G` at every node agrees with the one assembled
//! once from the seed by [`generator_from_seed`] — that residual is the
//! central consistency check of the whole crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DysonSeed, HamiltonianFamily};
use crate::operator::OperatorMatrix;

/// Conditioning limit for `Ω(t)`; beyond this the flow is declared broken.
pub const FLOW_COND_BOUND: f64 = 1e12;

/// Uniform integration grid: `dt` must divide `t_final`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_final: f64,
    pub dt: f64,
}

impl Grid {
    /// Number of RK4 steps. Errors unless `0 < dt ≤ t_final/2` and `dt`
    /// divides `t_final` to within one part in 10⁹.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.t_final.is_finite()) {
            return Err(Error::Validation("grid parameters must be finite".into()));
        }
        if self.dt <= 0.0 || self.t_final <= 0.0 {
            return Err(Error::Validation(format!(
                "grid parameters must be positive (dt = {}, t_final = {})",
                self.dt, self.t_final
            )));
        }
        if self.dt > self.t_final / 2.0 {
            return Err(Error::Validation(format!(
                "dt = {} must be at most t_final/2 = {}",
                self.dt,
                self.t_final / 2.0
            )));
        }
        let steps = (self.t_final / self.dt).round();
        if ((steps * self.dt - self.t_final) / self.t_final).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "dt = {} does not divide t_final = {}",
                self.dt, self.t_final
            )));
        }
        Ok(steps as usize)
    }
}

/// Sampled flow: per node, the time, `σ(t_k)` and `Ω(t_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    times: Vec<f64>,
    sigma: Vec<OperatorMatrix>,
    omega: Vec<OperatorMatrix>,
    dt: f64,
}

impl FlowTrace {
    /// Assembles a trace from raw parts, validating shape. Times must be
    /// strictly increasing and the three sequences must have equal length.
    pub fn from_parts(
        times: Vec<f64>,
        sigma: Vec<OperatorMatrix>,
        omega: Vec<OperatorMatrix>,
        dt: f64,
    ) -> Result<Self> {
        if times.len() != sigma.len() || times.len() != omega.len() {
            return Err(Error::Validation(
                "flow trace arrays of unequal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "flow trace times must be increasing".into(),
            ));
        }
        for (s, o) in sigma.iter().zip(&omega) {
            if s.dim() != o.dim() {
                return Err(Error::DimensionMismatch {
                    expected: o.dim(),
                    found: s.dim(),
                });
            }
        }
        Ok(Self {
            times,
            sigma,
            omega,
            dt,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.omega.first().map_or(0, OperatorMatrix::dim)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sigma(&self, node: usize) -> &OperatorMatrix {
        &self.sigma[node]
    }

    pub fn omega(&self, node: usize) -> &OperatorMatrix {
        &self.omega[node]
    }

    /// Overwrites one `Ω` sample. Exists for fault-injection diagnostics;
    /// see [`crate::verify::inject_flow_fault`].
    pub(crate) fn omega_mut(&mut self, node: usize) -> &mut OperatorMatrix {
        &mut self.omega[node]
    }
}

/// Operators derived from one flow node.
#[derive(Clone, Debug)]
pub struct DerivedOperators {
    /// `H = Ω⁻¹ h Ω`, the transformed Hamiltonian.
    pub friendly_h: OperatorMatrix,
    /// `Σ = Ω⁻¹ σ Ω`, the friendly-space coupling.
    pub friendly_sigma: OperatorMatrix,
    /// `Θ = Ω†Ω`, the metric (Hermitian positive definite).
    pub metric: OperatorMatrix,
    /// `G = H − Σ`, the instantaneous generator.
    pub generator: OperatorMatrix,
}

/// Forward-difference estimate `Ω̇(0) ≈ [Ω(Δ) − Ω(0)]/Δ`, first-order in `Δ`.
pub fn estimate_omega_dot(
    omega0: &OperatorMatrix,
    omega_delta: &OperatorMatrix,
    delta: f64,
) -> Result<OperatorMatrix> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::DegenerateStep { delta });
    }
    if omega_delta.dim() != omega0.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega0.dim(),
            found: omega_delta.dim(),
        });
    }
    Ok((omega_delta - omega0).scale_real(1.0 / delta))
}

/// `σ(0) = i Ω̇(0) Ω⁻¹(0)`, the flow coefficient matching a given map
/// derivative, so that `i Ω̇(0) = σ(0) Ω(0)` holds.
pub fn sigma_from_omega_dot(
    omega0: &OperatorMatrix,
    omega_dot0: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if omega_dot0.dim() != omega0.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega0.dim(),
            found: omega_dot0.dim(),
        });
    }
    // i Ω̇ Ω⁻¹ = (Ω⁻ᵀ (iΩ̇)ᵀ)ᵀ; solving the adjoint system avoids forming
    // the inverse explicitly.
    let i = Complex64::new(0.0, 1.0);
    let lhs = omega_dot0.scale(i);
    // X Ω = lhs  ⇔  Ω† X† = lhs†.
    let xt = omega0.adjoint().solve_matrix(&lhs.adjoint())?;
    Ok(xt.adjoint())
}

/// Right-hand side of the coefficient equation: `σ̇ = ḣ − i (h σ − σ h)`.
pub fn sigma_rhs(
    h: &OperatorMatrix,
    hdot: &OperatorMatrix,
    sigma: &OperatorMatrix,
) -> OperatorMatrix {
    let i = Complex64::new(0.0, 1.0);
    hdot - &h.commutator(sigma).scale(i)
}

/// Right-hand side of the map equation: `Ω̇ = −i σ Ω`.
pub fn omega_rhs(sigma: &OperatorMatrix, omega: &OperatorMatrix) -> OperatorMatrix {
    sigma.matmul(omega).scale(Complex64::new(0.0, -1.0))
}

/// Integrates the coupled system `(σ, Ω)` with classical RK4 on the uniform
/// grid. Node 0 carries the seed verbatim; global error is O(dt⁴).
pub fn integrate_flow(
    family: &HamiltonianFamily,
    seed: &DysonSeed,
    grid: &Grid,
) -> Result<FlowTrace> {
    if seed.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: seed.dim(),
        });
    }
    let steps = grid.steps()?;
    let dt = grid.dt;

    let mut sigma = seed.sigma0().clone();
    let mut omega = seed.omega0().clone();

    let mut times = Vec::with_capacity(steps + 1);
    let mut sigmas = Vec::with_capacity(steps + 1);
    let mut omegas = Vec::with_capacity(steps + 1);
    times.push(0.0);
    sigmas.push(sigma.clone());
    omegas.push(omega.clone());

    let rhs = |t: f64, s: &OperatorMatrix, o: &OperatorMatrix| {
        let h = family.hamiltonian(t);
        let hdot = family.hamiltonian_dot(t);
        (sigma_rhs(&h, &hdot, s), omega_rhs(s, o))
    };

    for k in 0..steps {
        let t = k as f64 * dt;
        let half = 0.5 * dt;

        let (ks1, ko1) = rhs(t, &sigma, &omega);
        let s2 = &sigma + &ks1.scale_real(half);
        let o2 = &omega + &ko1.scale_real(half);
        let (ks2, ko2) = rhs(t + half, &s2, &o2);
        let s3 = &sigma + &ks2.scale_real(half);
        let o3 = &omega + &ko2.scale_real(half);
        let (ks3, ko3) = rhs(t + half, &s3, &o3);
        let s4 = &sigma + &ks3.scale_real(dt);
        let o4 = &omega + &ko3.scale_real(dt);
        let (ks4, ko4) = rhs(t + dt, &s4, &o4);

        let sixth = dt / 6.0;
        sigma = &sigma + &(&(&ks1 + &ks4) + &(&ks2 + &ks3).scale_real(2.0)).scale_real(sixth);
        omega = &omega + &(&(&ko1 + &ko4) + &(&ko2 + &ko3).scale_real(2.0)).scale_real(sixth);

        let t_next = (k + 1) as f64 * dt;
        if !(sigma.all_finite() && omega.all_finite()) {
            return Err(Error::NonFinite {
                context: "flow integration",
            });
        }
        let cond = omega.condition_number()?;
        if cond > FLOW_COND_BOUND {
            return Err(Error::IllConditionedDyson { time: t_next, cond });
        }

        times.push(t_next);
        sigmas.push(sigma.clone());
        omegas.push(omega.clone());
    }

    Ok(FlowTrace {
        times,
        sigma: sigmas,
        omega: omegas,
        dt,
    })
}

/// Assembles `H`, `Σ`, `Θ`, `G` at one flow node.
pub fn derived_operators(
    family: &HamiltonianFamily,
    flow: &FlowTrace,
    node: usize,
) -> Result<DerivedOperators> {
    assert!(node < flow.len(), "flow node out of range");
    let t = flow.times[node];
    let omega = &flow.omega[node];
    let sigma = &flow.sigma[node];

    let h = family.hamiltonian(t);
    let friendly_h = omega.solve_matrix(&h.matmul(omega))?;
    let friendly_sigma = omega.solve_matrix(&sigma.matmul(omega))?;
    let metric = omega.adjoint().matmul(omega);
    match metric.is_positive_definite() {
        Ok(true) => {}
        Ok(false) => {
            let min = metric
                .spectrum()?
                .eigenvalues()
                .first()
                .map_or(0.0, |z| z.re);
            return Err(Error::MetricNotPositive {
                min_eigenvalue: min,
            });
        }
        Err(e) => return Err(e),
    }
    let generator = &friendly_h - &friendly_sigma;
    Ok(DerivedOperators {
        friendly_h,
        friendly_sigma,
        metric,
        generator,
    })
}

/// The constant generator assembled once from the seed:
/// `G = Ω(0)⁻¹ (h(0) − σ(0)) Ω(0)`.
pub fn generator_from_seed(h0: &OperatorMatrix, seed: &DysonSeed) -> Result<OperatorMatrix> {
    if h0.dim() != seed.dim() {
        return Err(Error::DimensionMismatch {
            expected: seed.dim(),
            found: h0.dim(),
        });
    }
    if !h0.is_hermitian(1e-10) {
        return Err(Error::NotHermitian {
            defect: h0.hermitian_defect() / h0.frobenius_norm().max(1.0),
            tol: 1e-10,
        });
    }
    let omega0 = seed.omega0();
    let shifted = h0 - seed.sigma0();
    omega0.solve_matrix(&shifted.matmul(omega0))
}

/// The same generator from sampled map data:
/// `G = Ω(0)⁻¹ h(0) Ω(0) − i Ω(0)⁻¹ Ω̇(0)`.
///
/// Agrees with [`generator_from_seed`] whenever `Ω̇(0) = −i σ(0) Ω(0)`.
pub fn generator_from_derivative(
    h0: &OperatorMatrix,
    omega0: &OperatorMatrix,
    omega_dot0: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    if omega0.dim() != h0.dim() || omega_dot0.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: omega0.dim(),
        });
    }
    let similarity = omega0.solve_matrix(&h0.matmul(omega0))?;
    // Subtract i·Ω⁻¹Ω̇.
    let correction = omega0
        .solve_matrix(omega_dot0)?
        .scale(Complex64::new(0.0, 1.0));
    Ok(&similarity - &correction)
}
