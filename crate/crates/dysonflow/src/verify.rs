//! Residual checks and convergence scans.
//!
//! Every identity the constant-generator picture relies on is recomputed
//! here as a nonnegative residual, normalized so that pass/fail thresholds
//! are scale-free:
//!
//! * `g_constancy` — the instantaneous generator assembled at each flow node
//!   must agree with the one assembled from the seed;
//! * `theta_intertwine` — the metric must follow its closed form
//!   `Θ(t) = e^{−iG†t} Θ(0) e^{iGt}`;
//! * `dieudonne` — the stationary quasi-Hermiticity constraint `H†Θ = ΘH`;
//! * `physical_norm_drift` / `ketket_overlap_drift` — the conservation laws
//!   of the physical picture and of the metric inner product;
//! * `cross_backend` — agreement between the time-ordered reference
//!   integration and the closed-form reconstruction.
//!
//! [`convergence_scan`] reruns a model over a ladder of step sizes and fits
//! the observed order of the flow-dependent residuals; classical RK4 should
//! land near four. [`inject_flow_fault`] deliberately corrupts a flow sample
//! so the detector sensitivity of the residuals themselves can be tested.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{derived_operators, generator_from_seed, integrate_flow, FlowTrace, Grid};
use crate::model::{DysonSeed, HamiltonianFamily};
use crate::operator::{OperatorMatrix, StateVector};
use crate::propagate::{evolve_cryptounitary, evolve_physical, EvolutionTrace};

/// Residuals below `100·ε` are considered saturated at the roundoff floor
/// and excluded from order fits.
pub const SATURATION_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Maximum relative deviation of the per-node generator from the seed
/// generator: `max_k ‖G(t_k) − G(0)‖_F / ‖G(0)‖_F`.
pub fn check_g_constancy(family: &HamiltonianFamily, flow: &FlowTrace) -> Result<f64> {
    let g0 = derived_operators(family, flow, 0)?.generator;
    let denom = g0.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for node in 1..flow.len() {
        let gk = derived_operators(family, flow, node)?.generator;
        worst = worst.max((&gk - &g0).frobenius_norm() / denom);
    }
    Ok(worst)
}

/// Maximum relative deviation of the sampled metric from its closed form:
/// `max_k ‖Θ(t_k) − e^{−iG†t_k} Θ(0) e^{iGt_k}‖_F / ‖Θ(0)‖_F`.
pub fn check_theta_evolution(flow: &FlowTrace, generator: &OperatorMatrix) -> Result<f64> {
    if flow.is_empty() {
        return Ok(0.0);
    }
    let theta0 = flow.omega(0).adjoint().matmul(flow.omega(0));
    let denom = theta0.frobenius_norm().max(f64::MIN_POSITIVE);
    let i = num_complex::Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for (node, &t) in flow.times().iter().enumerate() {
        let theta_k = flow.omega(node).adjoint().matmul(flow.omega(node));
        // e^{−iG†t} Θ₀ e^{iGt} = E† Θ₀ E with E = e^{iGt}.
        let e = generator.scale(i * t).exp()?;
        let closed = e.adjoint().matmul(&theta0).matmul(&e);
        worst = worst.max((&theta_k - &closed).frobenius_norm() / denom);
    }
    Ok(worst)
}

/// Normalized residual of the quasi-Hermiticity constraint:
/// `‖H†Θ − ΘH‖_F / (max(1, ‖H‖_F) · max(1, ‖Θ‖_F/√dim))`.
///
/// The metric norm enters through its root-mean-square eigenvalue scale
/// `‖Θ‖_F/√dim`, which is one for the identity metric of any dimension; the
/// residual is invariant under unitary co-transformations of the pair.
pub fn check_dieudonne(h_friendly: &OperatorMatrix, theta: &OperatorMatrix) -> f64 {
    let numerator =
        (&h_friendly.adjoint().matmul(theta) - &theta.matmul(h_friendly)).frobenius_norm();
    let dim = h_friendly.dim() as f64;
    let h_scale = h_friendly.frobenius_norm().max(1.0);
    let theta_scale = (theta.frobenius_norm() / dim.sqrt()).max(1.0);
    numerator / (h_scale * theta_scale)
}

/// Conservation drifts extracted from one propagated trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarityDrift {
    /// `max_k | ‖φ(t_k)‖² − ‖φ(0)‖² |`, relative to `max(1, ‖φ(0)‖²)`.
    pub physical_norm_drift: f64,
    /// `max_k | ⟨⟨Φ(t_k)|Φ(t_k)⟩ − ⟨⟨Φ(0)|Φ(0)⟩ |`, relative to
    /// `max(1, |⟨⟨Φ(0)|Φ(0)⟩|)`, with the metric supplied per node.
    pub ketket_overlap_drift: f64,
}

/// Computes both conservation drifts of a trajectory. `thetas` supplies the
/// metric at each node and must be aligned with the trace grid. A single-node
/// trace has zero drift by construction.
pub fn check_unitarity(
    trace: &EvolutionTrace,
    thetas: &[OperatorMatrix],
) -> Result<UnitarityDrift> {
    if thetas.len() != trace.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.len(),
            found: thetas.len(),
        });
    }
    if trace.is_empty() {
        return Ok(UnitarityDrift {
            physical_norm_drift: 0.0,
            ketket_overlap_drift: 0.0,
        });
    }
    let norms = trace.physical_norms();
    let base_norm_sq = norms[0] * norms[0];
    let physical_norm_drift = norms
        .iter()
        .map(|n| (n * n - base_norm_sq).abs())
        .fold(0.0, f64::max)
        / base_norm_sq.max(1.0);

    let overlap = |k: usize| {
        let friendly = &trace.states()[k].friendly;
        friendly.dirac_inner(&thetas[k].apply(friendly))
    };
    let base = overlap(0);
    let ketket_overlap_drift = (0..trace.len())
        .map(|k| (overlap(k) - base).norm())
        .fold(0.0, f64::max)
        / base.norm().max(1.0);

    Ok(UnitarityDrift {
        physical_norm_drift,
        ketket_overlap_drift,
    })
}

/// Drift of the metric overlap of two independently evolved states against
/// a fixed reference value (usually the physical overlap at `t = 0`):
/// `max_k | ⟨Φ₁(t_k)|Θ(t_k)|Φ₂(t_k)⟩ − reference |`, relative to
/// `max(1, |reference|)`.
pub fn pair_overlap_drift(
    trace1: &EvolutionTrace,
    trace2: &EvolutionTrace,
    thetas: &[OperatorMatrix],
    reference: num_complex::Complex64,
) -> Result<f64> {
    if trace1.len() != trace2.len() || thetas.len() != trace1.len() {
        return Err(Error::DimensionMismatch {
            expected: trace1.len(),
            found: thetas.len(),
        });
    }
    let mut worst = 0.0f64;
    for k in 0..trace1.len() {
        let overlap = trace1.states()[k]
            .friendly
            .dirac_inner(&thetas[k].apply(&trace2.states()[k].friendly));
        worst = worst.max((overlap - reference).norm());
    }
    Ok(worst / reference.norm().max(1.0))
}

/// Disagreement between the reference and closed-form backends:
/// `max_k ‖φ_direct(t_k) − φ_reconstructed(t_k)‖ / max(1, ‖φ(0)‖)`.
pub fn cross_backend_residual(direct: &EvolutionTrace, crypto: &EvolutionTrace) -> Result<f64> {
    if direct.len() != crypto.len() {
        return Err(Error::DimensionMismatch {
            expected: direct.len(),
            found: crypto.len(),
        });
    }
    if direct.is_empty() {
        return Ok(0.0);
    }
    let denom = direct.physical_norms()[0].max(1.0);
    let worst = (0..direct.len())
        .map(|k| (&direct.states()[k].physical - &crypto.states()[k].physical).norm())
        .fold(0.0, f64::max);
    Ok(worst / denom)
}

/// Returns a copy of the flow with `Ω` at one node perturbed by `epsilon`
/// (relative to that sample's Frobenius norm, floored at one) in its (0,0)
/// entry. Running the residual suite on the result measures detector
/// sensitivity.
pub fn inject_flow_fault(flow: &FlowTrace, node: usize, epsilon: f64) -> FlowTrace {
    let mut corrupted = flow.clone();
    let omega = corrupted.omega_mut(node);
    let scale = omega.frobenius_norm().max(1.0);
    let bumped = omega.entry(0, 0) + num_complex::Complex64::new(epsilon * scale, 0.0);
    omega.set_entry(0, 0, bumped);
    corrupted
}

/// Result of a convergence-order fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order")]
pub enum OrderFit {
    /// Least-squares slope of log-residual against log-dt.
    Fitted(f64),
    /// Every usable point sat at the roundoff floor; no slope is meaningful.
    Saturated,
}

/// Residual ladders and fitted orders from a step-size scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub dts: Vec<f64>,
    /// Residual per step size, keyed by residual name.
    pub residuals: BTreeMap<String, Vec<f64>>,
    /// Fitted order per residual name.
    pub orders: BTreeMap<String, OrderFit>,
}

/// Reruns a model over a ladder of step sizes and fits the convergence order
/// of the `g_constancy` and `cross_backend` residuals.
///
/// Requires at least three strictly decreasing step sizes.
pub fn convergence_scan(
    family: &HamiltonianFamily,
    seed: &DysonSeed,
    t_final: f64,
    dts: &[f64],
) -> Result<ScanReport> {
    if dts.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            given: dts.len(),
        });
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Validation(
            "step sizes must be strictly decreasing".into(),
        ));
    }

    let generator = generator_from_seed(&family.hamiltonian(0.0), seed)?;
    let phi0 = StateVector::basis(family.dim(), 0);

    let mut g_residuals = Vec::with_capacity(dts.len());
    let mut cb_residuals = Vec::with_capacity(dts.len());
    for &dt in dts {
        let grid = Grid { t_final, dt };
        let flow = integrate_flow(family, seed, &grid)?;
        let direct = evolve_physical(family, &phi0, &grid)?;
        let crypto = evolve_cryptounitary(&generator, &flow, &phi0)?;
        g_residuals.push(check_g_constancy(family, &flow)?);
        cb_residuals.push(cross_backend_residual(&direct, &crypto)?);
    }

    let mut residuals = BTreeMap::new();
    let mut orders = BTreeMap::new();
    orders.insert("g_constancy".to_string(), fit_order(dts, &g_residuals));
    orders.insert("cross_backend".to_string(), fit_order(dts, &cb_residuals));
    residuals.insert("g_constancy".to_string(), g_residuals);
    residuals.insert("cross_backend".to_string(), cb_residuals);

    Ok(ScanReport {
        dts: dts.to_vec(),
        residuals,
        orders,
    })
}

/// Least-squares slope of `ln r` against `ln dt`, excluding floor-saturated
/// points.
pub fn fit_order(dts: &[f64], residuals: &[f64]) -> OrderFit {
    let points: Vec<(f64, f64)> = dts
        .iter()
        .zip(residuals)
        .filter(|(_, &r)| r > SATURATION_FLOOR)
        .map(|(&dt, &r)| (dt.ln(), r.ln()))
        .collect();
    if points.len() < 2 {
        return OrderFit::Saturated;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    OrderFit::Fitted(sxy / sxx)
}

/// Pass/fail verdict for one named residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// Structured outcome of one verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    /// Model identifier, `<kind>-<dim>`.
    pub model: String,
    /// Grid the run used, when one applies.
    pub grid: Option<Grid>,
    /// Named residuals (all finite and nonnegative).
    pub residuals: BTreeMap<String, f64>,
    /// Informational diagnostics that carry no pass/fail meaning, such as
    /// the Dirac-norm drift witness of the friendly ket.
    pub diagnostics: BTreeMap<String, f64>,
    /// Fitted convergence orders, when a scan ran.
    pub orders: BTreeMap<String, OrderFit>,
    /// Tolerances in force for this run.
    pub tolerances: BTreeMap<String, f64>,
    /// Per-residual verdicts: pass iff residual ≤ tolerance.
    pub status: BTreeMap<String, CheckStatus>,
    /// True iff every checked residual passed.
    pub passed: bool,
    /// Wall-clock duration of the run, seconds.
    pub wall_time_s: f64,
    /// The fully resolved configuration the run used, rendered back to its
    /// document form (defaults and overrides applied).
    #[serde(default)]
    pub config_echo: String,
}

impl RunReport {
    /// Assembles a report, deriving the per-residual verdicts. Only
    /// residuals with a configured tolerance receive a verdict.
    pub fn assemble(
        model: String,
        grid: Option<Grid>,
        residuals: BTreeMap<String, f64>,
        diagnostics: BTreeMap<String, f64>,
        orders: BTreeMap<String, OrderFit>,
        tolerances: BTreeMap<String, f64>,
        wall_time_s: f64,
    ) -> Result<Self> {
        for (name, value) in &residuals {
            if !value.is_finite() || *value < 0.0 {
                return Err(Error::Validation(format!(
                    "residual `{name}` is not a finite nonnegative number: {value}"
                )));
            }
        }
        let mut status = BTreeMap::new();
        for (name, value) in &residuals {
            if let Some(tol) = tolerances.get(name) {
                let verdict = if value <= tol {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                };
                status.insert(name.clone(), verdict);
            }
        }
        let passed = status.values().all(|s| *s == CheckStatus::Pass);
        Ok(Self {
            model,
            grid,
            residuals,
            diagnostics,
            orders,
            tolerances,
            status,
            passed,
            wall_time_s,
            config_echo: String::new(),
        })
    }

    /// Attaches the resolved configuration document.
    pub fn with_config_echo(mut self, config: String) -> Self {
        self.config_echo = config;
        self
    }
}

/// Default tolerances: flow-dependent identities get 1e−6 budgets sized for
/// `dt = 1e−3` grids (1e−8 where conservation is exact up to integration
/// error), purely algebraic identities get 1e−10.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    let mut map = BTreeMap::new();
    map.insert("g_constancy".to_string(), 1e-8);
    map.insert("theta_intertwine".to_string(), 1e-6);
    map.insert("cross_backend".to_string(), 1e-6);
    map.insert("dieudonne".to_string(), 1e-10);
    map.insert("physical_norm_drift".to_string(), 1e-8);
    map.insert("ketket_overlap_drift".to_string(), 1e-8);
    map
}
