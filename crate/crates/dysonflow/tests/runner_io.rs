//! End-to-end pipeline and persistence tests: the runner over configuration
//! documents, record round-trips, and determinism of record output.

mod common;

use common::c;
use dysonflow::config::{parse_model_config, serialize_model_config, ParseMode};
use dysonflow::runner::{execute, spectrum_report};
use dysonflow::trace_io::{
    evolution_from_records, evolution_to_records, flow_from_records, flow_to_records,
    report_from_json, report_to_json,
};
use dysonflow::verify::CheckStatus;

const RABI_RANDOM: &str = r#"
    [model]
    kind = "rabi"
    dim = 2
    epsilon = 1.0
    coupling = 0.8
    frequency = 3.0

    [seed]
    recipe = "random"
    cond_max = 50.0
    rng_seed = 7

    [grid]
    dt = 2e-3
    t_final = 1.0
"#;

const STATIC_BAD: &str = r#"
    [model]
    kind = "static"
    dim = 2
    matrix = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]

    [grid]
    dt = 0.05
    t_final = 0.5
"#;

#[test]
fn dynamic_pipeline_produces_a_passing_report() {
    let spec = parse_model_config(RABI_RANDOM, ParseMode::Strict)
        .unwrap()
        .spec;
    let artifacts = execute(&spec).unwrap();
    let report = &artifacts.report;
    assert!(report.passed, "report failed: {report:?}");
    assert_eq!(report.model, "rabi-2");
    for name in [
        "g_constancy",
        "theta_intertwine",
        "cross_backend",
        "dieudonne",
        "physical_norm_drift",
        "ketket_overlap_drift",
    ] {
        assert!(
            report.residuals.contains_key(name),
            "missing residual {name}"
        );
        assert_eq!(report.status[name], CheckStatus::Pass, "{name} failed");
    }
    // The non-unitary seed leaves a visible footprint in the diagnostics.
    assert!(report.diagnostics["dirac_norm_drift"] > 1e-3);
    assert!(artifacts.flow.is_some());
}

#[test]
fn static_model_with_identity_metric_fails_quasi_hermiticity() {
    let spec = parse_model_config(STATIC_BAD, ParseMode::Strict)
        .unwrap()
        .spec;
    let artifacts = execute(&spec).unwrap();
    let report = &artifacts.report;
    assert!(!report.passed);
    assert_eq!(report.status["dieudonne"], CheckStatus::Fail);
    // The evolution is skipped when the constraint fails.
    assert!(artifacts.crypto_trace.is_none());
}

#[test]
fn static_model_from_hermitian_parent_passes() {
    // Build a legitimate quasi-Hermitian pair and feed it through the
    // config layer.
    let omega = common::well_conditioned_map(5, 2);
    let h = common::random_hermitian(6, 2);
    let friendly = omega.solve_matrix(&h.matmul(&omega)).unwrap();
    let spec_text = format!(
        r#"
        [model]
        kind = "static"
        dim = 2
        matrix = {}

        [seed]
        recipe = "explicit"
        omega0 = {}
        sigma0 = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]

        [grid]
        dt = 0.05
        t_final = 0.5
        "#,
        toml_matrix(&friendly),
        toml_matrix(&omega),
    );
    let spec = parse_model_config(&spec_text, ParseMode::Strict)
        .unwrap()
        .spec;
    let artifacts = execute(&spec).unwrap();
    assert!(artifacts.report.passed, "{:?}", artifacts.report);
    assert!(artifacts.crypto_trace.is_some());
}

fn toml_matrix(m: &dysonflow::operator::OperatorMatrix) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| {
            let cells: Vec<String> = (0..m.dim())
                .map(|j| {
                    let z = m.entry(i, j);
                    format!("[{:?}, {:?}]", z.re, z.im)
                })
                .collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

#[test]
fn runner_record_outputs_are_deterministic_and_round_trip() {
    let spec = parse_model_config(RABI_RANDOM, ParseMode::Strict)
        .unwrap()
        .spec;
    let first = execute(&spec).unwrap();
    let second = execute(&spec).unwrap();

    let flow_a = flow_to_records(first.flow.as_ref().unwrap());
    let flow_b = flow_to_records(second.flow.as_ref().unwrap());
    assert_eq!(flow_a, flow_b, "flow records are not byte-identical");

    let parsed = flow_from_records(&flow_a).unwrap();
    assert_eq!(&parsed, first.flow.as_ref().unwrap());
    assert_eq!(flow_to_records(&parsed), flow_a);

    let evo_a = evolution_to_records(first.crypto_trace.as_ref().unwrap());
    let evo_b = evolution_to_records(second.crypto_trace.as_ref().unwrap());
    assert_eq!(evo_a, evo_b, "evolution records are not byte-identical");
    let evo_parsed = evolution_from_records(&evo_a).unwrap();
    assert_eq!(evolution_to_records(&evo_parsed), evo_a);
}

#[test]
fn report_json_round_trips() {
    let spec = parse_model_config(RABI_RANDOM, ParseMode::Strict)
        .unwrap()
        .spec;
    let artifacts = execute(&spec).unwrap();
    let text = report_to_json(&artifacts.report);
    let back = report_from_json(&text).unwrap();
    assert_eq!(back.residuals, artifacts.report.residuals);
    assert_eq!(back.status, artifacts.report.status);
    assert_eq!(back.passed, artifacts.report.passed);
}

#[test]
fn config_round_trip_through_the_runner_is_stable() {
    let spec = parse_model_config(RABI_RANDOM, ParseMode::Strict)
        .unwrap()
        .spec;
    let rendered = serialize_model_config(&spec);
    let reparsed = parse_model_config(&rendered, ParseMode::Strict)
        .unwrap()
        .spec;
    assert_eq!(spec, reparsed);
    // Identical specs produce identical artifacts.
    let a = execute(&spec).unwrap();
    let b = execute(&reparsed).unwrap();
    assert_eq!(
        flow_to_records(a.flow.as_ref().unwrap()),
        flow_to_records(b.flow.as_ref().unwrap())
    );
}

#[test]
fn spectrum_report_certifies_isospectrality() {
    let spec = parse_model_config(RABI_RANDOM, ParseMode::Strict)
        .unwrap()
        .spec;
    let report = spectrum_report(&spec).unwrap();
    let delta = report.max_isospectral_delta.unwrap();
    assert!(delta <= 1e-8 * report.cond_omega0.max(1.0), "delta {delta}");
    let physical = report.physical.unwrap();
    assert_eq!(physical.len(), 2);
    // The rabi spectrum at t = 0 is ±sqrt(ε² + v²).
    let expected = (1.0f64 + 0.8 * 0.8).sqrt();
    let eigs = physical.eigenvalues();
    assert!((eigs[0] - c(-expected, 0.0)).norm() < 1e-12);
    assert!((eigs[1] - c(expected, 0.0)).norm() < 1e-12);
}
