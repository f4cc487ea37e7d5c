//! Batch front door for the dysonflow engine.
//!
//! One command per process: parse a configuration, run the requested
//! pipeline, persist artifacts, and encode the outcome in the exit status:
//!
//! * `0` — run completed and every enabled check passed;
//! * `1` — usage or configuration error;
//! * `2` — the run completed but a check failed;
//! * `3` — numerical failure (singular matrix, ill-conditioned Dyson map,
//!   non-finite values) or an I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use dysonflow::config::{parse_model_config, ModelKind, ModelSpec, ParseMode, TraceFormat};
use dysonflow::error::Error;
use dysonflow::model::SeedRecipe;
use dysonflow::runner::{execute, spectrum_report};
use dysonflow::trace_io::{
    evolution_to_records, evolution_to_table, flow_to_records, flow_to_table, report_to_json,
};
use dysonflow::verify::{convergence_scan, CheckStatus, OrderFit};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "DYSONFLOW_OUT";

/// Scalar seed used when `--seed-recipe scalar` is given on the command line
/// (configs spell the value out explicitly).
const DEFAULT_SCALAR_SEED: Complex64 = Complex64::new(0.0, 0.3);

#[derive(Parser)]
#[command(
    name = "dysonflow",
    version,
    about = "Constant-generator reformulation of time-dependent Hermitian evolution: integrate Dyson flows, propagate, and verify."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow, run both propagation backends, verify, and write
    /// traces plus the run report.
    Evolve(RunArgs),
    /// Run the verification residuals only and write the run report.
    Check(RunArgs),
    /// Rerun the model over a ladder of step sizes and fit convergence
    /// orders.
    Scan(ScanArgs),
    /// Write the spectra of h(0), H(0) and G with isospectrality deltas.
    Spectrum(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $DYSONFLOW_OUT, then the current
    /// directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override grid.dt.
    #[arg(long)]
    dt: Option<f64>,
    /// Override grid.t_final.
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    /// Override the seed recipe: identity | scalar | random.
    #[arg(long = "seed-recipe")]
    seed_recipe: Option<String>,
    /// Override the RNG seed for random recipes.
    #[arg(long = "rng-seed")]
    rng_seed: Option<u64>,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tol")]
    tolerances: Vec<String>,
    /// Trace format: records | table.
    #[arg(long)]
    format: Option<String>,
    /// Downgrade unknown configuration keys from errors to warnings.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated, strictly decreasing step sizes.
    #[arg(long, default_value = "4e-3,2e-3,1e-3")]
    dts: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    let outcome = match cli.command {
        Command::Evolve(args) => run_pipeline(&args, true),
        Command::Check(args) => run_pipeline(&args, false),
        Command::Scan(args) => run_scan(&args),
        Command::Spectrum(args) => run_spectrum(&args),
    };

    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Maps error classes onto the exit-code contract.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::Validation(_)
        | Error::UnknownKind(_)
        | Error::BadExplicitMatrix(_)
        | Error::DimensionMismatch { .. }
        | Error::InsufficientPoints { .. } => 1,
        Error::NotQuasiHermitian { .. } => 2,
        Error::NonFinite { .. }
        | Error::SingularMatrix { .. }
        | Error::NoConvergence { .. }
        | Error::NotHermitian { .. }
        | Error::MetricNotPositive { .. }
        | Error::IllConditionedDyson { .. }
        | Error::DegenerateStep { .. }
        | Error::CondBoundViolated { .. }
        | Error::Io(_) => 3,
    }
}

fn load_spec(args: &RunArgs) -> Result<ModelSpec, Error> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::Validation(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mode = if args.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let parsed = parse_model_config(&text, mode)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    let mut spec = parsed.spec;

    if let Some(dt) = args.dt {
        spec.grid.dt = dt;
    }
    if let Some(t_final) = args.t_final {
        spec.grid.t_final = t_final;
    }
    spec.grid.steps()?;

    if let Some(recipe) = &args.seed_recipe {
        spec.seed.recipe = match recipe.as_str() {
            "identity" => SeedRecipe::Identity,
            "scalar" => SeedRecipe::Scalar(DEFAULT_SCALAR_SEED),
            "random" => SeedRecipe::Random { cond_max: 50.0 },
            other => {
                return Err(Error::Validation(format!(
                    "--seed-recipe must be identity, scalar or random (got `{other}`)"
                )))
            }
        };
    }
    if let Some(rng_seed) = args.rng_seed {
        spec.seed.rng_seed = rng_seed;
    }
    if let Some(format) = &args.format {
        spec.output.format = match format.as_str() {
            "records" => TraceFormat::Records,
            "table" => TraceFormat::Table,
            other => {
                return Err(Error::Validation(format!(
                    "--format must be records or table (got `{other}`)"
                )))
            }
        };
    }
    for entry in &args.tolerances {
        let (name, value) = entry.split_once('=').ok_or_else(|| {
            Error::Validation(format!("--tol expects NAME=VALUE (got `{entry}`)"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|e| Error::Validation(format!("--tol {name}: {e}")))?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Validation(format!(
                "--tol {name}: tolerance must be a positive finite number"
            )));
        }
        if !spec.output.tolerances.contains_key(name) {
            return Err(Error::Validation(format!(
                "--tol names unknown residual `{name}`"
            )));
        }
        spec.output.tolerances.insert(name.to_string(), value);
    }
    Ok(spec)
}

fn out_dir(args: &RunArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run_pipeline(args: &RunArgs, persist_traces: bool) -> Result<ExitCode, Error> {
    let spec = load_spec(args)?;
    let dir = out_dir(args);
    let artifacts = execute(&spec)?;

    if persist_traces {
        match spec.output.format {
            TraceFormat::Records => {
                if let Some(flow) = &artifacts.flow {
                    write_atomic(&dir.join("flow_trace.jsonl"), &flow_to_records(flow))?;
                }
                if let Some(trace) = &artifacts.physical_trace {
                    write_atomic(
                        &dir.join("evolution_physical.jsonl"),
                        &evolution_to_records(trace),
                    )?;
                }
                if let Some(trace) = &artifacts.crypto_trace {
                    write_atomic(
                        &dir.join("evolution_crypto.jsonl"),
                        &evolution_to_records(trace),
                    )?;
                }
            }
            TraceFormat::Table => {
                if let Some(flow) = &artifacts.flow {
                    write_atomic(&dir.join("flow_trace.csv"), &flow_to_table(flow))?;
                }
                if let Some(trace) = &artifacts.physical_trace {
                    write_atomic(
                        &dir.join("evolution_physical.csv"),
                        &evolution_to_table(trace),
                    )?;
                }
                if let Some(trace) = &artifacts.crypto_trace {
                    write_atomic(
                        &dir.join("evolution_crypto.csv"),
                        &evolution_to_table(trace),
                    )?;
                }
            }
        }
    }
    write_atomic(&dir.join("report.json"), &report_to_json(&artifacts.report))?;

    let report = &artifacts.report;
    println!(
        "model {} on dt = {}, t_final = {}",
        report.model, spec.grid.dt, spec.grid.t_final
    );
    for (name, value) in &report.residuals {
        let verdict = match report.status.get(name) {
            Some(CheckStatus::Pass) => "pass",
            Some(CheckStatus::Fail) => "FAIL",
            None => "info",
        };
        println!("  {name:<22} {value:12.3e}  {verdict}");
    }
    for (name, value) in &report.diagnostics {
        println!("  {name:<22} {value:12.3e}  (diagnostic)");
    }
    if report.passed {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("checks failed");
        Ok(ExitCode::from(2))
    }
}

fn run_scan(args: &ScanArgs) -> Result<ExitCode, Error> {
    let spec = load_spec(&args.run)?;
    let dts = parse_dts(&args.dts)?;
    let family = match &spec.model {
        ModelKind::Family(family) => family.clone(),
        ModelKind::StaticFriendly { .. } => {
            return Err(Error::Validation(
                "scan needs a time-dependent model; static models have no step size".into(),
            ))
        }
    };
    let seed = spec.seed.recipe.build(spec.dim(), spec.seed.rng_seed)?;
    let scan = convergence_scan(&family, &seed, spec.grid.t_final, &dts)?;

    let dir = out_dir(&args.run);
    let mut doc = serde_json_string(&scan);
    doc.push('\n');
    write_atomic(&dir.join("scan_report.json"), &doc)?;

    println!(
        "convergence scan of {} over {:?}",
        spec.model_id(),
        scan.dts
    );
    for (name, residuals) in &scan.residuals {
        let formatted: Vec<String> = residuals.iter().map(|r| format!("{r:.3e}")).collect();
        println!("  {name:<16} residuals [{}]", formatted.join(", "));
    }
    for (name, order) in &scan.orders {
        match order {
            OrderFit::Fitted(value) => println!("  {name:<16} fitted order {value:.3}"),
            OrderFit::Saturated => println!("  {name:<16} saturated at the roundoff floor"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_spectrum(args: &RunArgs) -> Result<ExitCode, Error> {
    let spec = load_spec(args)?;
    let report = spectrum_report(&spec)?;
    let dir = out_dir(args);
    let mut doc = serde_json_string(&report);
    doc.push('\n');
    write_atomic(&dir.join("spectrum.json"), &doc)?;

    println!("spectra for {}", report.model);
    if let Some(physical) = &report.physical {
        println!("  h(0):  {}", format_spectrum(physical));
    }
    println!("  H(0):  {}", format_spectrum(&report.friendly));
    if let Some(generator) = &report.generator {
        println!("  G:     {}", format_spectrum(generator));
    }
    if let Some(delta) = report.max_isospectral_delta {
        println!(
            "  max isospectral delta {delta:.3e} (cond Ω(0) = {:.3e})",
            report.cond_omega0
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn format_spectrum(s: &dysonflow::operator::Spectrum) -> String {
    let parts: Vec<String> = s
        .eigenvalues()
        .iter()
        .map(|z| format!("{:+.6e}{:+.6e}i", z.re, z.im))
        .collect();
    parts.join(", ")
}

fn parse_dts(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| Error::Validation(format!("--dts entry `{part}`: {e}")))
        })
        .collect()
}

fn serde_json_string<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serialization")
}

/// Whole-file atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
