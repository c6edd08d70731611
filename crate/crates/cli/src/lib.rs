//! Command-line front-end for `fresco`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the
//! process exit status: 0 on success, 1 on invalid input, 2 when a
//! candidate cap is exceeded, 3 on an internal invariant violation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod input;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fresco::fixtures::{doubling_bounded_center, doubling_bounded_fixture, doubling_unbounded_fixture, planted_instance};
use fresco::{CenterOptions, Curve, FrescoError, SampleConfig};
use thiserror::Error;

use input::{Format, Series};
use report::ClusterReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error(transparent)]
    Library(#[from] FrescoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Output(_) => 1,
            CliError::Library(FrescoError::InvalidInput(_)) => 1,
            CliError::Library(FrescoError::ResourceLimit { .. }) => 2,
            CliError::Library(FrescoError::Invariant(_)) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fresco", version, about = "Clustering of time series under the Fréchet distance")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "FRESCO_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    /// Curve file: wide CSV `id,v1,v2,…`, long CSV `id,t,value`, or JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Report destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fréchet distance between the two series of a file.
    Dist {
        #[command(flatten)]
        io: Io,
    },
    /// δ-signature of every series.
    Signature {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        delta: f64,
    },
    /// Minimum-error simplification to at most `ell` vertices.
    Simplify {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        ell: usize,
    },
    /// (k,ℓ)-center or (k,ℓ)-median clustering.
    Cluster(ClusterArgs),
    /// Writes a synthetic curve file.
    GenFixtures(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Center,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Constant-factor approximation.
    Constant,
    /// (1+ε)-approximation.
    Refine,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Center)]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value_t = Mode::Refine)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Failure probability per repeat (median only).
    #[arg(long, default_value_t = 0.2)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = fresco::DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Inputs perturbed around random centers.
    Planted,
    /// 2^d+1 curves pairwise at distance 1/4 within 1/8 of one center.
    Doubling,
    /// As `doubling`, with complexity at most `ell`.
    DoublingBounded,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 30)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curve file destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the generating centers here.
    #[arg(long)]
    centers: Option<PathBuf>,
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit status. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("fresco: {}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    if cli.threads > 0 {
        // fails only if a pool already exists, e.g. when called twice in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fresco: {e}");
            e.exit_code()
        }
    }
}

fn emit(output: Option<&PathBuf>, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    write_bytes(output, text.as_bytes())
}

fn write_bytes(output: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn per_series<F>(series: &[Series], key: &str, f: F) -> serde_json::Value
where
    F: Fn(&Curve) -> serde_json::Value,
{
    use serde_json::{json, Map, Value};
    if let [one] = series {
        return json!({ key: f(&one.curve) });
    }
    let map: Map<String, Value> = series.iter().map(|s| (s.id.clone(), f(&s.curve))).collect();
    json!({ format!("{key}s"): map })
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Dist { io } => {
            let series = input::read_path(&io.input, io.format)?;
            let [a, b] = series.as_slice() else {
                return Err(CliError::Input(format!(
                    "dist needs exactly 2 series, {} has {}",
                    io.input.display(),
                    series.len()
                )));
            };
            let d = fresco::distance(&a.curve, &b.curve);
            emit(io.output.as_ref(), &serde_json::json!({ "distance": d }))
        }
        Command::Signature { io, delta } => {
            if !(delta >= 0.0) || !delta.is_finite() {
                return Err(CliError::Input(format!("--delta must be a non-negative number, got {delta}")));
            }
            let series = input::read_path(&io.input, io.format)?;
            let value = per_series(&series, "signature", |c| {
                serde_json::json!(fresco::delta_signature(c, delta).values())
            });
            emit(io.output.as_ref(), &value)
        }
        Command::Simplify { io, ell } => {
            let series = input::read_path(&io.input, io.format)?;
            let mut simplified = Vec::with_capacity(series.len());
            for s in &series {
                simplified.push(fresco::simplify(&s.curve, ell)?);
            }
            let value = if let [one] = series.as_slice() {
                serde_json::json!({
                    "simplified": simplified[0].values(),
                    "error": fresco::distance(&one.curve, &simplified[0]),
                })
            } else {
                let map: serde_json::Map<String, serde_json::Value> = series
                    .iter()
                    .zip(&simplified)
                    .map(|(s, c)| {
                        let v = serde_json::json!({ "simplified": c.values(), "error": fresco::distance(&s.curve, c) });
                        (s.id.clone(), v)
                    })
                    .collect();
                serde_json::json!({ "simplifications": map })
            };
            emit(io.output.as_ref(), &value)
        }
        Command::Cluster(args) => cluster(args),
        Command::GenFixtures(args) => gen_fixtures(args),
    }
}

fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    let series = input::read_path(&args.io.input, args.io.format)?;
    let curves: Vec<Curve> = series.iter().map(|s| s.curve.clone()).collect();
    let started = Instant::now();
    let cfg = SampleConfig {
        epsilon: args.epsilon,
        lambda: args.lambda,
        ell: args.ell,
        seed: args.seed,
        repeats: args.repeats,
    };
    let opts = CenterOptions {
        max_candidates: args.max_candidates,
    };
    let (algorithm, solution) = match (args.objective, args.mode) {
        (ObjectiveArg::Center, Mode::Constant) => {
            ("constant_factor_center", fresco::constant_factor_center(&curves, args.k, args.ell)?.0)
        }
        (ObjectiveArg::Center, Mode::Refine) => (
            "refine_center",
            fresco::refine_center_with(&curves, args.k, args.ell, args.epsilon, &opts)?,
        ),
        (ObjectiveArg::Median, Mode::Constant) => {
            ("constant_factor_median", fresco::constant_factor_median(&curves, args.k, args.ell)?.0)
        }
        (ObjectiveArg::Median, Mode::Refine) if args.k == 1 => {
            ("one_median", fresco::one_median(&curves, args.ell, &cfg)?)
        }
        (ObjectiveArg::Median, Mode::Refine) => ("k_median", fresco::k_median(&curves, args.k, args.ell, &cfg)?),
    };
    let sampled = args.objective == ObjectiveArg::Median && args.mode == Mode::Refine;
    let report = ClusterReport {
        algorithm,
        objective: solution.guarantee.objective.as_str(),
        k: args.k,
        ell: args.ell,
        epsilon: (args.mode == Mode::Refine).then_some(args.epsilon),
        lambda: sampled.then_some(args.lambda),
        seed: sampled.then_some(args.seed),
        cost: solution.cost,
        guarantee_factor: solution.guarantee.factor,
        centers: solution.centers.iter().map(|c| c.values().to_vec()).collect(),
        assignment: series.iter().zip(&solution.assignment).map(|(s, &j)| (s.id.clone(), j)).collect(),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    emit(args.io.output.as_ref(), &report)
}

fn named(prefix: &str, curves: Vec<Curve>) -> Vec<Series> {
    curves
        .into_iter()
        .enumerate()
        .map(|(i, curve)| Series { id: format!("{prefix}{i}"), curve })
        .collect()
}

fn gen_fixtures(args: FixtureArgs) -> Result<(), CliError> {
    let (inputs, centers) = match args.kind {
        Kind::Planted => {
            let inst = planted_instance(args.k, args.ell, args.n, args.m, args.radius, args.separation, args.seed)?;
            (inst.inputs, inst.centers)
        }
        Kind::Doubling => {
            let (curves, center) = doubling_unbounded_fixture(args.d)?;
            (curves, vec![center])
        }
        Kind::DoublingBounded => (
            doubling_bounded_fixture(args.d, args.ell)?,
            vec![doubling_bounded_center(args.d, args.ell)?],
        ),
    };
    let mut buf = Vec::new();
    input::write_csv(&mut buf, &named("s", inputs))?;
    write_bytes(args.output.as_ref(), &buf)?;
    if let Some(path) = &args.centers {
        let mut buf = Vec::new();
        input::write_csv(&mut buf, &named("c", centers))?;
        write_bytes(Some(path), &buf)?;
    }
    Ok(())
}
