//! Experiment configuration: parsing, validation, and round-trip
//! serialization.
//!
//! Configurations are TOML documents with four sections:
//!
//! ```toml
//! [model]                      # required
//! kind = "rabi"                # constant | diagonal-poly | rabi | poly-matrix | static
//! dim = 2
//! epsilon = 1.0
//! coupling = 0.5
//! frequency = 2.0
//!
//! [seed]                       # optional; defaults to the identity recipe
//! recipe = "random"            # identity | scalar | random | explicit
//! cond_max = 50.0
//! rng_seed = 7
//!
//! [grid]                       # optional; defaults dt = 1e-3, t_final = 1.0
//! dt = 1e-3
//! t_final = 1.0
//!
//! [output]                     # optional
//! format = "records"           # records | table
//! [output.tolerances]          # overrides, keyed by residual name
//! g_constancy = 1e-8
//! ```
//!
//! Complex scalars are two-element arrays `[re, im]`; matrices are row-major
//! arrays of rows of such pairs. Keys the schema does not know are an error
//! in strict mode and a warning in lenient mode. Parsing then serializing
//! then parsing again reproduces the identical [`ModelSpec`], including every
//! applied default.

use std::collections::BTreeMap;

use num_complex::Complex64;
use toml::Value;

use crate::error::{Error, Result};
use crate::flow::Grid;
use crate::model::{HamiltonianFamily, Polynomial, SeedRecipe};
use crate::operator::OperatorMatrix;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_FINAL: f64 = 1.0;
pub const DEFAULT_COND_MAX: f64 = 50.0;
pub const DEFAULT_RNG_SEED: u64 = 0;

/// Models a configuration can request: a time-dependent Hamiltonian family,
/// or a stationary friendly-space generator paired with the seed's metric.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Family(HamiltonianFamily),
    /// A fixed, possibly non-Hermitian generator in the friendly space; the
    /// metric comes from the seed as `Θ = Ω(0)†Ω(0)`.
    StaticFriendly {
        h: OperatorMatrix,
    },
}

impl ModelKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::Family(family) => family.dim(),
            Self::StaticFriendly { h } => h.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Family(family) => family.kind(),
            Self::StaticFriendly { .. } => "static",
        }
    }
}

/// Seed recipe plus the RNG seed that makes random recipes reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSpec {
    pub recipe: SeedRecipe,
    pub rng_seed: u64,
}

/// Trace file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    /// Line-delimited structured records; round-trips bit-exactly.
    Records,
    /// Flat table with 17-significant-digit decimal columns, for plotting.
    Table,
}

impl TraceFormat {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Records => "records",
            Self::Table => "table",
        }
    }
}

/// Output options: trace format and tolerance overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputOptions {
    pub format: TraceFormat,
    pub tolerances: BTreeMap<String, f64>,
}

/// A fully validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub model: ModelKind,
    pub seed: SeedSpec,
    pub grid: Grid,
    pub output: OutputOptions,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `<kind>-<dim>`, the identifier used in reports and file names.
    pub fn model_id(&self) -> String {
        format!("{}-{}", self.model.kind_name(), self.dim())
    }
}

/// How to treat keys the schema does not know.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseMode {
    /// Unknown keys are a validation error.
    Strict,
    /// Unknown keys are collected as warnings.
    Lenient,
}

/// Parse outcome: the spec plus any lenient-mode warnings.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub spec: ModelSpec,
    pub warnings: Vec<String>,
}

const RESIDUAL_NAMES: [&str; 6] = [
    "g_constancy",
    "theta_intertwine",
    "cross_backend",
    "dieudonne",
    "physical_norm_drift",
    "ketket_overlap_drift",
];

/// Parses and validates a configuration document.
pub fn parse_model_config(text: &str, mode: ParseMode) -> Result<ParsedConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;

    let mut unknown = Vec::new();
    note_unknown_keys(
        &table,
        &["model", "seed", "grid", "output"],
        "",
        &mut unknown,
    );

    let model_table = require_table(&table, "model")?;
    let model = parse_model_section(model_table, &mut unknown)?;
    let dim = model.dim();

    let seed = match table.get("seed") {
        Some(value) => parse_seed_section(as_table(value, "seed")?, dim, &mut unknown)?,
        None => SeedSpec {
            recipe: SeedRecipe::Identity,
            rng_seed: DEFAULT_RNG_SEED,
        },
    };

    let grid = match table.get("grid") {
        Some(value) => parse_grid_section(as_table(value, "grid")?, &mut unknown)?,
        None => Grid {
            t_final: DEFAULT_T_FINAL,
            dt: DEFAULT_DT,
        },
    };
    grid.steps().map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("grid: {msg}")),
        other => other,
    })?;

    let output = match table.get("output") {
        Some(value) => parse_output_section(as_table(value, "output")?, &mut unknown)?,
        None => OutputOptions {
            format: TraceFormat::Records,
            tolerances: crate::verify::default_tolerances(),
        },
    };

    if !unknown.is_empty() && mode == ParseMode::Strict {
        return Err(Error::Validation(format!(
            "unknown configuration keys: {}",
            unknown.join(", ")
        )));
    }
    let warnings = unknown
        .into_iter()
        .map(|key| format!("ignoring unknown configuration key `{key}`"))
        .collect();

    Ok(ParsedConfig {
        spec: ModelSpec {
            model,
            seed,
            grid,
            output,
        },
        warnings,
    })
}

fn parse_model_section(table: &toml::Table, unknown: &mut Vec<String>) -> Result<ModelKind> {
    let kind = require_str(table, "model", "kind")?;
    let dim = require_dim(table)?;
    let allowed: &[&str] = match kind.as_str() {
        "constant" | "static" => &["kind", "dim", "matrix"],
        "diagonal-poly" => &["kind", "dim", "diagonal"],
        "rabi" => &["kind", "dim", "epsilon", "coupling", "frequency"],
        "poly-matrix" => &["kind", "dim", "coefficients"],
        other => return Err(Error::UnknownKind(other.to_string())),
    };
    note_unknown_keys(table, allowed, "model.", unknown);

    let model = match kind.as_str() {
        "constant" => {
            let matrix = require_matrix(table, "model", "matrix", dim)?;
            ModelKind::Family(
                HamiltonianFamily::constant(matrix)
                    .map_err(|e| Error::Validation(format!("model.matrix: {e}")))?,
            )
        }
        "static" => {
            let matrix = require_matrix(table, "model", "matrix", dim)?;
            ModelKind::StaticFriendly { h: matrix }
        }
        "diagonal-poly" => {
            let raw = table
                .get("diagonal")
                .ok_or_else(|| missing("model", "diagonal"))?;
            let rows: Vec<Vec<f64>> = decode(raw, "model.diagonal")?;
            if rows.len() != dim {
                return Err(Error::Validation(format!(
                    "model.diagonal has {} entries but dim = {dim}",
                    rows.len()
                )));
            }
            let polys = rows
                .into_iter()
                .map(Polynomial::new)
                .collect::<Result<Vec<_>>>()?;
            ModelKind::Family(HamiltonianFamily::diagonal_poly(polys)?)
        }
        "rabi" => {
            if dim != 2 {
                return Err(Error::Validation(format!(
                    "the rabi family is two-level; got dim = {dim}"
                )));
            }
            let epsilon = require_float(table, "model", "epsilon")?;
            let coupling = require_float(table, "model", "coupling")?;
            let frequency = require_float(table, "model", "frequency")?;
            ModelKind::Family(HamiltonianFamily::rabi(epsilon, coupling, frequency))
        }
        "poly-matrix" => {
            let raw = table
                .get("coefficients")
                .ok_or_else(|| missing("model", "coefficients"))?;
            let matrices: Vec<OperatorMatrix> = decode(raw, "model.coefficients")?;
            for (k, m) in matrices.iter().enumerate() {
                if m.dim() != dim {
                    return Err(Error::Validation(format!(
                        "model.coefficients[{k}] has dim {} but dim = {dim}",
                        m.dim()
                    )));
                }
            }
            ModelKind::Family(
                HamiltonianFamily::poly_matrix(matrices)
                    .map_err(|e| Error::Validation(format!("model.coefficients: {e}")))?,
            )
        }
        _ => unreachable!("kind validated above"),
    };
    Ok(model)
}

fn parse_seed_section(
    table: &toml::Table,
    dim: usize,
    unknown: &mut Vec<String>,
) -> Result<SeedSpec> {
    let recipe_name = match table.get("recipe") {
        Some(v) => as_str(v, "seed.recipe")?,
        None => "identity".to_string(),
    };
    let allowed: &[&str] = match recipe_name.as_str() {
        "identity" => &["recipe", "rng_seed"],
        "scalar" => &["recipe", "value", "rng_seed"],
        "random" => &["recipe", "cond_max", "rng_seed"],
        "explicit" => &["recipe", "omega0", "sigma0", "rng_seed"],
        other => {
            return Err(Error::Validation(format!(
                "seed.recipe: unknown recipe `{other}`"
            )))
        }
    };
    note_unknown_keys(table, allowed, "seed.", unknown);

    let rng_seed = match table.get("rng_seed") {
        Some(v) => as_u64(v, "seed.rng_seed")?,
        None => DEFAULT_RNG_SEED,
    };
    let recipe = match recipe_name.as_str() {
        "identity" => SeedRecipe::Identity,
        "scalar" => {
            let raw = table.get("value").ok_or_else(|| missing("seed", "value"))?;
            let (re, im): (f64, f64) = decode(raw, "seed.value")?;
            SeedRecipe::Scalar(Complex64::new(re, im))
        }
        "random" => {
            let cond_max = match table.get("cond_max") {
                Some(v) => as_float(v, "seed.cond_max")?,
                None => DEFAULT_COND_MAX,
            };
            if cond_max.is_nan() || cond_max < 1.0 {
                return Err(Error::Validation(format!(
                    "seed.cond_max must be at least 1 (got {cond_max})"
                )));
            }
            SeedRecipe::Random { cond_max }
        }
        "explicit" => {
            let omega0 = require_matrix(table, "seed", "omega0", dim)?;
            let sigma0 = require_matrix(table, "seed", "sigma0", dim)?;
            SeedRecipe::Explicit { omega0, sigma0 }
        }
        _ => unreachable!("recipe validated above"),
    };
    Ok(SeedSpec { recipe, rng_seed })
}

fn parse_grid_section(table: &toml::Table, unknown: &mut Vec<String>) -> Result<Grid> {
    note_unknown_keys(table, &["dt", "t_final"], "grid.", unknown);
    let dt = match table.get("dt") {
        Some(v) => as_float(v, "grid.dt")?,
        None => DEFAULT_DT,
    };
    let t_final = match table.get("t_final") {
        Some(v) => as_float(v, "grid.t_final")?,
        None => DEFAULT_T_FINAL,
    };
    Ok(Grid { t_final, dt })
}

fn parse_output_section(table: &toml::Table, unknown: &mut Vec<String>) -> Result<OutputOptions> {
    note_unknown_keys(table, &["format", "tolerances"], "output.", unknown);
    let format = match table.get("format") {
        Some(v) => match as_str(v, "output.format")?.as_str() {
            "records" => TraceFormat::Records,
            "table" => TraceFormat::Table,
            other => {
                return Err(Error::Validation(format!(
                    "output.format must be `records` or `table`, got `{other}`"
                )))
            }
        },
        None => TraceFormat::Records,
    };
    let mut tolerances = crate::verify::default_tolerances();
    if let Some(raw) = table.get("tolerances") {
        let overrides = as_table(raw, "output.tolerances")?;
        for (name, value) in overrides {
            if !RESIDUAL_NAMES.contains(&name.as_str()) {
                unknown.push(format!("output.tolerances.{name}"));
                continue;
            }
            let tol = as_float(value, &format!("output.tolerances.{name}"))?;
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::Validation(format!(
                    "output.tolerances.{name} must be positive (got {tol})"
                )));
            }
            tolerances.insert(name.clone(), tol);
        }
    }
    Ok(OutputOptions { format, tolerances })
}

/// Renders a spec back to a TOML document with every field explicit, so that
/// `parse ∘ serialize` is the identity.
pub fn serialize_model_config(spec: &ModelSpec) -> String {
    let mut root = toml::Table::new();

    let mut model = toml::Table::new();
    model.insert("kind".into(), Value::String(spec.model.kind_name().into()));
    model.insert("dim".into(), Value::Integer(spec.dim() as i64));
    match &spec.model {
        ModelKind::Family(HamiltonianFamily::Constant { matrix }) => {
            model.insert("matrix".into(), matrix_value(matrix));
        }
        ModelKind::Family(HamiltonianFamily::DiagonalPoly { diagonal }) => {
            let rows: Vec<Value> = diagonal
                .iter()
                .map(|p| Value::Array(p.coefficients().iter().map(|&c| Value::Float(c)).collect()))
                .collect();
            model.insert("diagonal".into(), Value::Array(rows));
        }
        ModelKind::Family(HamiltonianFamily::Rabi {
            epsilon,
            coupling,
            frequency,
        }) => {
            model.insert("epsilon".into(), Value::Float(*epsilon));
            model.insert("coupling".into(), Value::Float(*coupling));
            model.insert("frequency".into(), Value::Float(*frequency));
        }
        ModelKind::Family(HamiltonianFamily::PolyMatrix { coefficients }) => {
            let ms: Vec<Value> = coefficients.iter().map(matrix_value).collect();
            model.insert("coefficients".into(), Value::Array(ms));
        }
        ModelKind::StaticFriendly { h } => {
            model.insert("matrix".into(), matrix_value(h));
        }
    }
    root.insert("model".into(), Value::Table(model));

    let mut seed = toml::Table::new();
    seed.insert(
        "recipe".into(),
        Value::String(spec.seed.recipe.name().into()),
    );
    match &spec.seed.recipe {
        SeedRecipe::Identity => {}
        SeedRecipe::Scalar(s) => {
            seed.insert(
                "value".into(),
                Value::Array(vec![Value::Float(s.re), Value::Float(s.im)]),
            );
        }
        SeedRecipe::Random { cond_max } => {
            seed.insert("cond_max".into(), Value::Float(*cond_max));
        }
        SeedRecipe::Explicit { omega0, sigma0 } => {
            seed.insert("omega0".into(), matrix_value(omega0));
            seed.insert("sigma0".into(), matrix_value(sigma0));
        }
    }
    seed.insert("rng_seed".into(), Value::Integer(spec.seed.rng_seed as i64));
    root.insert("seed".into(), Value::Table(seed));

    let mut grid = toml::Table::new();
    grid.insert("dt".into(), Value::Float(spec.grid.dt));
    grid.insert("t_final".into(), Value::Float(spec.grid.t_final));
    root.insert("grid".into(), Value::Table(grid));

    let mut output = toml::Table::new();
    output.insert(
        "format".into(),
        Value::String(spec.output.format.name().into()),
    );
    let mut tols = toml::Table::new();
    for (name, value) in &spec.output.tolerances {
        tols.insert(name.clone(), Value::Float(*value));
    }
    output.insert("tolerances".into(), Value::Table(tols));
    root.insert("output".into(), Value::Table(output));

    toml::to_string_pretty(&Value::Table(root)).expect("spec serialization cannot fail")
}

fn matrix_value(m: &OperatorMatrix) -> Value {
    let rows: Vec<Value> = (0..m.dim())
        .map(|i| {
            Value::Array(
                (0..m.dim())
                    .map(|j| {
                        let z = m.entry(i, j);
                        Value::Array(vec![Value::Float(z.re), Value::Float(z.im)])
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

fn note_unknown_keys(
    table: &toml::Table,
    allowed: &[&str],
    prefix: &str,
    unknown: &mut Vec<String>,
) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            unknown.push(format!("{prefix}{key}"));
        }
    }
}

fn require_table<'a>(table: &'a toml::Table, key: &str) -> Result<&'a toml::Table> {
    let value = table
        .get(key)
        .ok_or_else(|| Error::Validation(format!("missing required section [{key}]")))?;
    as_table(value, key)
}

fn as_table<'a>(value: &'a Value, path: &str) -> Result<&'a toml::Table> {
    value
        .as_table()
        .ok_or_else(|| Error::Validation(format!("{path}: expected a table")))
}

fn as_str(value: &Value, path: &str) -> Result<String> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Validation(format!("{path}: expected a string")))
}

fn as_float(value: &Value, path: &str) -> Result<f64> {
    let x = match value {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        _ => return Err(Error::Validation(format!("{path}: expected a number"))),
    };
    if !x.is_finite() {
        return Err(Error::Validation(format!(
            "{path}: must be finite (got {x})"
        )));
    }
    Ok(x)
}

fn as_u64(value: &Value, path: &str) -> Result<u64> {
    match value {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::Validation(format!(
            "{path}: expected a nonnegative integer"
        ))),
    }
}

fn require_str(table: &toml::Table, section: &str, key: &str) -> Result<String> {
    let value = table.get(key).ok_or_else(|| missing(section, key))?;
    as_str(value, &format!("{section}.{key}"))
}

fn require_float(table: &toml::Table, section: &str, key: &str) -> Result<f64> {
    let value = table.get(key).ok_or_else(|| missing(section, key))?;
    as_float(value, &format!("{section}.{key}"))
}

fn require_dim(table: &toml::Table) -> Result<usize> {
    let value = table.get("dim").ok_or_else(|| missing("model", "dim"))?;
    let dim = as_u64(value, "model.dim")? as usize;
    if !(2..=64).contains(&dim) {
        return Err(Error::Validation(format!(
            "model.dim must lie in 2..=64 (got {dim}); this engine targets desk-scale models"
        )));
    }
    Ok(dim)
}

fn require_matrix(
    table: &toml::Table,
    section: &str,
    key: &str,
    dim: usize,
) -> Result<OperatorMatrix> {
    let raw = table.get(key).ok_or_else(|| missing(section, key))?;
    let matrix: OperatorMatrix = decode(raw, &format!("{section}.{key}"))?;
    if matrix.dim() != dim {
        return Err(Error::Validation(format!(
            "{section}.{key} has dim {} but model.dim = {dim}",
            matrix.dim()
        )));
    }
    Ok(matrix)
}

fn decode<T: serde::de::DeserializeOwned>(value: &Value, path: &str) -> Result<T> {
    value
        .clone()
        .try_into()
        .map_err(|e| Error::Validation(format!("{path}: {e}")))
}

fn missing(section: &str, key: &str) -> Error {
    Error::Validation(format!("missing required key {section}.{key}"))
}
