//! End-to-end pipeline: build the model, integrate the flow, propagate both
//! ways, and verify.
//!
//! [`execute`] is what the command line calls, but it is ordinary library
//! code: tests and the guide drive it directly. Overlap diagnostics use the
//! first two canonical basis vectors as physical probe states.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, ModelSpec};
use crate::error::{Error, Result};
use crate::flow::{derived_operators, generator_from_seed, integrate_flow, FlowTrace};
use crate::model::DysonSeed;
use crate::operator::{OperatorMatrix, Spectrum, StateVector};
use crate::propagate::{
    evolve_cryptounitary, evolve_physical, evolve_static_crypto, EvolutionTrace, StateTriple,
};
use crate::verify::{
    check_dieudonne, check_g_constancy, check_theta_evolution, check_unitarity,
    cross_backend_residual, pair_overlap_drift, RunReport,
};

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub seed: DysonSeed,
    /// The integrated flow (absent for static models).
    pub flow: Option<FlowTrace>,
    /// Reference time-ordered trajectory of the first probe.
    pub physical_trace: Option<EvolutionTrace>,
    /// Closed-form trajectory of the first probe.
    pub crypto_trace: Option<EvolutionTrace>,
    pub report: RunReport,
}

/// Runs the full pipeline for one spec.
pub fn execute(spec: &ModelSpec) -> Result<RunArtifacts> {
    let started = Instant::now();
    let dim = spec.dim();
    let seed = spec.seed.recipe.build(dim, spec.seed.rng_seed)?;

    match &spec.model {
        ModelKind::Family(family) => {
            let flow = integrate_flow(family, &seed, &spec.grid)?;
            let generator = generator_from_seed(&family.hamiltonian(0.0), &seed)?;
            let thetas: Vec<OperatorMatrix> = (0..flow.len())
                .map(|k| flow.omega(k).adjoint().matmul(flow.omega(k)))
                .collect();

            let probe1 = StateVector::basis(dim, 0);
            let probe2 = StateVector::basis(dim, 1);
            let direct = evolve_physical(family, &probe1, &spec.grid)?;
            let crypto1 = evolve_cryptounitary(&generator, &flow, &probe1)?;
            let crypto2 = evolve_cryptounitary(&generator, &flow, &probe2)?;

            let mut residuals = BTreeMap::new();
            residuals.insert("g_constancy".into(), check_g_constancy(family, &flow)?);
            residuals.insert(
                "theta_intertwine".into(),
                check_theta_evolution(&flow, &generator)?,
            );
            residuals.insert(
                "cross_backend".into(),
                cross_backend_residual(&direct, &crypto1)?,
            );
            let node0 = derived_operators(family, &flow, 0)?;
            residuals.insert(
                "dieudonne".into(),
                check_dieudonne(&node0.friendly_h, &node0.metric),
            );

            let direct_norm_drift = norm_sq_drift(&direct);
            let crypto_checks = check_unitarity(&crypto1, &thetas)?;
            residuals.insert(
                "physical_norm_drift".into(),
                direct_norm_drift.max(crypto_checks.physical_norm_drift),
            );
            let pair_reference = probe1.dirac_inner(&probe2);
            let pair_drift = pair_overlap_drift(&crypto1, &crypto2, &thetas, pair_reference)?;
            residuals.insert(
                "ketket_overlap_drift".into(),
                crypto_checks.ketket_overlap_drift.max(pair_drift),
            );

            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("dirac_norm_drift".into(), dirac_norm_drift(&crypto1));
            diagnostics.insert(
                "cond_omega_final".into(),
                flow.omega(flow.len() - 1).condition_number()?,
            );

            let report = RunReport::assemble(
                spec.model_id(),
                Some(spec.grid),
                residuals,
                diagnostics,
                BTreeMap::new(),
                spec.output.tolerances.clone(),
                started.elapsed().as_secs_f64(),
            )?
            .with_config_echo(crate::config::serialize_model_config(spec));
            Ok(RunArtifacts {
                seed,
                flow: Some(flow),
                physical_trace: Some(direct),
                crypto_trace: Some(crypto1),
                report,
            })
        }
        ModelKind::StaticFriendly { h } => {
            let theta = seed.omega0().adjoint().matmul(seed.omega0());
            let mut residuals = BTreeMap::new();
            let mut diagnostics = BTreeMap::new();
            residuals.insert("dieudonne".into(), check_dieudonne(h, &theta));

            let steps = spec.grid.steps()?;
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * spec.grid.dt).collect();
            let probe1 = StateVector::basis(dim, 0);

            let crypto_trace = match evolve_static_crypto(h, &theta, &probe1, &times) {
                Ok(states) => {
                    let triples: Vec<StateTriple> = states
                        .iter()
                        .map(|friendly| StateTriple {
                            physical: seed.omega0().apply(friendly),
                            friendly: friendly.clone(),
                            ketket: theta.apply(friendly),
                        })
                        .collect();
                    let trace = EvolutionTrace::from_parts(times.clone(), triples)?;
                    let thetas = vec![theta.clone(); trace.len()];
                    let checks = check_unitarity(&trace, &thetas)?;
                    residuals.insert("physical_norm_drift".into(), checks.physical_norm_drift);
                    residuals.insert("ketket_overlap_drift".into(), checks.ketket_overlap_drift);
                    diagnostics.insert("dirac_norm_drift".into(), dirac_norm_drift(&trace));
                    Some(trace)
                }
                // A failed quasi-Hermiticity precondition is a verdict, not a
                // crash: the dieudonne residual carries it into the report.
                Err(Error::NotQuasiHermitian { .. }) => None,
                Err(other) => return Err(other),
            };

            let report = RunReport::assemble(
                spec.model_id(),
                Some(spec.grid),
                residuals,
                diagnostics,
                BTreeMap::new(),
                spec.output.tolerances.clone(),
                started.elapsed().as_secs_f64(),
            )?
            .with_config_echo(crate::config::serialize_model_config(spec));
            Ok(RunArtifacts {
                seed,
                flow: None,
                physical_trace: None,
                crypto_trace,
                report,
            })
        }
    }
}

/// Spectra of the stationary operators of a run, with the isospectrality gap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub model: String,
    /// Spectrum of `h(0)` (absent for static models).
    pub physical: Option<Spectrum>,
    /// Spectrum of `H(0) = Ω(0)⁻¹ h(0) Ω(0)`, or of the static `H`.
    pub friendly: Spectrum,
    /// Spectrum of the constant generator `G` (absent for static models).
    pub generator: Option<Spectrum>,
    /// Largest element-wise gap between the sorted spectra of `h(0)` and
    /// `H(0)`; zero in exact arithmetic.
    pub max_isospectral_delta: Option<f64>,
    pub cond_omega0: f64,
}

/// Computes the spectra of `h(0)`, `H(0)` and `G` for a spec.
pub fn spectrum_report(spec: &ModelSpec) -> Result<SpectrumReport> {
    let dim = spec.dim();
    let seed = spec.seed.recipe.build(dim, spec.seed.rng_seed)?;
    let cond_omega0 = seed.omega0().condition_number()?;
    match &spec.model {
        ModelKind::Family(family) => {
            let h0 = family.hamiltonian(0.0);
            let omega0 = seed.omega0();
            let friendly_h = omega0.solve_matrix(&h0.matmul(omega0))?;
            let generator = generator_from_seed(&h0, &seed)?;
            let physical = h0.spectrum()?;
            let friendly = friendly_h.spectrum()?;
            let delta = physical.max_abs_difference(&friendly);
            Ok(SpectrumReport {
                model: spec.model_id(),
                physical: Some(physical),
                friendly,
                generator: Some(generator.spectrum()?),
                max_isospectral_delta: Some(delta),
                cond_omega0,
            })
        }
        ModelKind::StaticFriendly { h } => Ok(SpectrumReport {
            model: spec.model_id(),
            physical: None,
            friendly: h.spectrum()?,
            generator: None,
            max_isospectral_delta: None,
            cond_omega0,
        }),
    }
}

fn norm_sq_drift(trace: &EvolutionTrace) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    let base = trace.physical_norms()[0].powi(2);
    trace
        .physical_norms()
        .iter()
        .map(|n| (n * n - base).abs())
        .fold(0.0, f64::max)
        / base.max(1.0)
}

fn dirac_norm_drift(trace: &EvolutionTrace) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    let base = trace.dirac_norms()[0];
    trace
        .dirac_norms()
        .iter()
        .map(|n| (n - base).abs())
        .fold(0.0, f64::max)
}
