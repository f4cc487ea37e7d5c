//! Trace and report persistence.
//!
//! Two trace encodings:
//!
//! * **records** — a line-delimited stream: one JSON header line, then one
//!   JSON record per grid node. Floats use the shortest round-tripping
//!   decimal form, so `parse ∘ emit` is the identity and repeated runs are
//!   byte-identical.
//! * **table** — a flat CSV with one column per real/imaginary component,
//!   rendered with 17 significant digits for plotting tools.
//!
//! Matrices and states use the crate-wide wire encoding: complex scalars are
//! `[re, im]` pairs, matrices are row-major arrays of rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::operator::{OperatorMatrix, StateVector};
use crate::propagate::{EvolutionTrace, StateTriple};
use crate::verify::RunReport;

#[derive(Serialize, Deserialize)]
struct FlowHeader {
    kind: String,
    dim: usize,
    dt: f64,
    nodes: usize,
}

#[derive(Serialize, Deserialize)]
struct FlowRecord {
    t: f64,
    sigma: OperatorMatrix,
    omega: OperatorMatrix,
}

#[derive(Serialize, Deserialize)]
struct EvolutionHeader {
    kind: String,
    dim: usize,
    nodes: usize,
}

#[derive(Serialize, Deserialize)]
struct EvolutionRecord {
    t: f64,
    phi: StateVector,
    phi_friendly: StateVector,
    phi_ketket: StateVector,
    dirac_norm: f64,
    physical_norm: f64,
}

/// Renders a flow trace as a record stream.
pub fn flow_to_records(flow: &FlowTrace) -> String {
    let mut out = String::new();
    let header = FlowHeader {
        kind: "flow-trace".into(),
        dim: flow.dim(),
        dt: flow.dt(),
        nodes: flow.len(),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serialization"));
    out.push('\n');
    for k in 0..flow.len() {
        let record = FlowRecord {
            t: flow.times()[k],
            sigma: flow.sigma(k).clone(),
            omega: flow.omega(k).clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serialization"));
        out.push('\n');
    }
    out
}

/// Parses a flow-trace record stream, validating the header against the body.
pub fn flow_from_records(text: &str) -> Result<FlowTrace> {
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty flow-trace stream".into()))?;
    let header: FlowHeader = serde_json::from_str(header_line)
        .map_err(|e| Error::Parse(format!("flow-trace header: {e}")))?;
    if header.kind != "flow-trace" {
        return Err(Error::Parse(format!(
            "expected a flow-trace stream, found kind `{}`",
            header.kind
        )));
    }
    let mut times = Vec::with_capacity(header.nodes);
    let mut sigma = Vec::with_capacity(header.nodes);
    let mut omega = Vec::with_capacity(header.nodes);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: FlowRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("flow-trace record {idx}: {e}")))?;
        if record.sigma.dim() != header.dim || record.omega.dim() != header.dim {
            return Err(Error::Parse(format!(
                "flow-trace record {idx}: dimension disagrees with header"
            )));
        }
        times.push(record.t);
        sigma.push(record.sigma);
        omega.push(record.omega);
    }
    if times.len() != header.nodes {
        return Err(Error::Parse(format!(
            "flow-trace header promises {} nodes but stream has {}",
            header.nodes,
            times.len()
        )));
    }
    FlowTrace::from_parts(times, sigma, omega, header.dt)
}

/// Renders a flow trace as a flat decimal table.
pub fn flow_to_table(flow: &FlowTrace) -> String {
    let dim = flow.dim();
    let mut out = String::from("t");
    for label in ["sigma", "omega"] {
        for i in 0..dim {
            for j in 0..dim {
                out.push_str(&format!(",{label}_{i}_{j}_re,{label}_{i}_{j}_im"));
            }
        }
    }
    out.push('\n');
    for k in 0..flow.len() {
        out.push_str(&fixed(flow.times()[k]));
        for m in [flow.sigma(k), flow.omega(k)] {
            for i in 0..dim {
                for j in 0..dim {
                    let z = m.entry(i, j);
                    out.push(',');
                    out.push_str(&fixed(z.re));
                    out.push(',');
                    out.push_str(&fixed(z.im));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Renders an evolution trace as a record stream.
pub fn evolution_to_records(trace: &EvolutionTrace) -> String {
    let dim = trace.states().first().map_or(0, |s| s.physical.dim());
    let mut out = String::new();
    let header = EvolutionHeader {
        kind: "evolution-trace".into(),
        dim,
        nodes: trace.len(),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serialization"));
    out.push('\n');
    for k in 0..trace.len() {
        let s = &trace.states()[k];
        let record = EvolutionRecord {
            t: trace.times()[k],
            phi: s.physical.clone(),
            phi_friendly: s.friendly.clone(),
            phi_ketket: s.ketket.clone(),
            dirac_norm: trace.dirac_norms()[k],
            physical_norm: trace.physical_norms()[k],
        };
        out.push_str(&serde_json::to_string(&record).expect("record serialization"));
        out.push('\n');
    }
    out
}

/// Parses an evolution-trace record stream.
pub fn evolution_from_records(text: &str) -> Result<EvolutionTrace> {
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty evolution-trace stream".into()))?;
    let header: EvolutionHeader = serde_json::from_str(header_line)
        .map_err(|e| Error::Parse(format!("evolution-trace header: {e}")))?;
    if header.kind != "evolution-trace" {
        return Err(Error::Parse(format!(
            "expected an evolution-trace stream, found kind `{}`",
            header.kind
        )));
    }
    let mut times = Vec::with_capacity(header.nodes);
    let mut states = Vec::with_capacity(header.nodes);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EvolutionRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("evolution-trace record {idx}: {e}")))?;
        times.push(record.t);
        states.push(StateTriple {
            physical: record.phi,
            friendly: record.phi_friendly,
            ketket: record.phi_ketket,
        });
    }
    if times.len() != header.nodes {
        return Err(Error::Parse(format!(
            "evolution-trace header promises {} nodes but stream has {}",
            header.nodes,
            times.len()
        )));
    }
    EvolutionTrace::from_parts(times, states)
}

/// Renders an evolution trace as a flat decimal table.
pub fn evolution_to_table(trace: &EvolutionTrace) -> String {
    let dim = trace.states().first().map_or(0, |s| s.physical.dim());
    let mut out = String::from("t");
    for label in ["phi", "phi_friendly", "phi_ketket"] {
        for i in 0..dim {
            out.push_str(&format!(",{label}_{i}_re,{label}_{i}_im"));
        }
    }
    out.push_str(",dirac_norm,physical_norm\n");
    for k in 0..trace.len() {
        out.push_str(&fixed(trace.times()[k]));
        let s = &trace.states()[k];
        for v in [&s.physical, &s.friendly, &s.ketket] {
            for z in v.amplitudes() {
                out.push(',');
                out.push_str(&fixed(z.re));
                out.push(',');
                out.push_str(&fixed(z.im));
            }
        }
        out.push(',');
        out.push_str(&fixed(trace.dirac_norms()[k]));
        out.push(',');
        out.push_str(&fixed(trace.physical_norms()[k]));
        out.push('\n');
    }
    out
}

/// Renders a run report as a JSON document.
pub fn report_to_json(report: &RunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}

/// Parses a run report document.
pub fn report_from_json(text: &str) -> Result<RunReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("run report: {e}")))
}

/// 17-significant-digit decimal rendering; round-trips any f64.
fn fixed(x: f64) -> String {
    format!("{x:.16e}")
}
