//! `halfmap`: command-line front end for the half-harmonic map laboratory.
//!
//! Exit status is 0 when every acceptance bound of the command holds, 1 when
//! the run completed but a bound failed, and 2 on any error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::{Outcome, Verdict};
use config::{parse_schedule, parse_zeros, ConfigError, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "halfmap",
    version,
    about = "Spectral experiments on half-harmonic maps from the circle into spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Energy, degree and Euler-Lagrange residual of a map.
    Energy,
    /// Euler-Lagrange and structure-identity residuals of a map.
    Residual,
    /// Dirichlet energy of the harmonic extension against the boundary energy.
    ExtendCheck,
    /// Littlewood-Paley blocks and paraproduct reconstruction.
    LpDecompose,
    /// Ratio study of the commutator operators over the random ensemble.
    CommutatorStudy,
    /// Concentration analysis of a Möbius family.
    BubbleRun,
    /// Projected gradient descent of the energy.
    Flow,
    /// Fast invariant suite.
    Selftest {
        /// Flip the sign of the Riesz transform (mutation check).
        #[arg(long, hide = true)]
        corrupt_riesz: bool,
    },
}

#[derive(Args)]
struct Opts {
    /// Grid size (a power of two, at least 8).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concentration threshold.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Blaschke zeros, comma-separated, each `re` or `re:im`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    zeros: Option<String>,
    /// Family parameters: a comma-separated list or `dyadic:LO..HI`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    schedule: Option<String>,
    /// Directory for the report and artifact files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use the constant map (or family).
    #[arg(long, global = true)]
    constant: bool,
    /// Sampled-map file to analyze.
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    /// Ensemble size per peak frequency.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Comma-separated peak frequencies.
    #[arg(long, global = true)]
    peaks: Option<String>,
    /// Amplitude of a seeded tangential perturbation of the input map.
    #[arg(long, global = true, allow_hyphen_values = true)]
    perturb: Option<f64>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn flag<T>(name: &str, parsed: Result<T, String>) -> Result<T, ConfigError> {
    parsed.map_err(|m| ConfigError::Invalid(format!("--{name}: {m}")))
}

fn resolve(opts: &Opts) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        cfg.apply_file(path)?;
    }
    for kv in &opts.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, found `{kv}`")))?;
        flag("set", cfg.set(k.trim(), v))?;
    }
    if let Some(n) = opts.n {
        cfg.n = Some(n);
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(g) = opts.gamma {
        cfg.gamma = g;
    }
    if let Some(z) = &opts.zeros {
        cfg.zeros = flag("zeros", parse_zeros(z))?;
    }
    if let Some(s) = &opts.schedule {
        cfg.schedule = flag("schedule", parse_schedule(s))?;
    }
    if let Some(p) = &opts.peaks {
        cfg.peaks = flag(
            "peaks",
            p.split(',')
                .map(|t| t.trim().parse().map_err(|_| format!("bad frequency `{t}`")))
                .collect(),
        )?;
    }
    if let Some(s) = opts.samples {
        cfg.samples = s;
    }
    if let Some(p) = opts.perturb {
        cfg.perturb = p;
    }
    if let Some(f) = opts.format {
        cfg.format = f;
    }
    if let Some(o) = &opts.out {
        cfg.out = Some(o.clone());
    }
    if let Some(m) = &opts.map {
        cfg.map = Some(m.clone());
    }
    cfg.constant |= opts.constant;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Verdict> {
    let cfg = resolve(&cli.opts)?;
    let (name, outcome): (&str, Outcome) = match &cli.command {
        Command::Energy => ("energy", commands::energy_cmd(&cfg)?),
        Command::Residual => ("residual", commands::residual_cmd(&cfg)?),
        Command::ExtendCheck => ("extend-check", commands::extend_check_cmd(&cfg)?),
        Command::LpDecompose => ("lp-decompose", commands::lp_decompose_cmd(&cfg)?),
        Command::CommutatorStudy => ("commutator-study", commands::commutator_study_cmd(&cfg)?),
        Command::BubbleRun => ("bubble-run", commands::bubble_run_cmd(&cfg)?),
        Command::Flow => ("flow", commands::flow_cmd(&cfg)?),
        Command::Selftest { corrupt_riesz } => ("selftest", commands::selftest_cmd(&cfg, *corrupt_riesz)?),
    };
    output::emit(name, &cfg, &outcome, &mut std::io::stdout().lock())?;
    Ok(outcome.verdict)
}

fn error_kind(e: &anyhow::Error) -> (&'static str, Option<usize>) {
    use halfmap::Error as E;
    if let Some(c) = e.downcast_ref::<ConfigError>() {
        let line = match c {
            ConfigError::Syntax { line, .. } => Some(*line),
            _ => None,
        };
        return ("config", line);
    }
    match e.downcast_ref::<E>() {
        Some(E::Parse { line, .. }) => ("parse", Some(*line)),
        Some(E::InvalidInput(_)) => ("invalid_input", None),
        Some(E::MeanNotZero { .. }) => ("mean_not_zero", None),
        Some(E::NotOnSphere { .. }) => ("not_on_sphere", None),
        Some(E::DegenerateParameter(_)) => ("degenerate_parameter", None),
        Some(E::DegreeUndetermined { .. }) => ("degree_undetermined", None),
        Some(E::InsufficientResolution(_)) => ("insufficient_resolution", None),
        Some(E::ExtractionUnreliable { .. }) => ("extraction_unreliable", None),
        Some(E::InconsistentProfile(_)) => ("inconsistent_profile", None),
        Some(E::InsufficientFamily(_)) => ("insufficient_family", None),
        None if e.downcast_ref::<std::io::Error>().is_some() => ("io", None),
        None => ("internal", None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail(msg)) => {
            eprintln!("{}", json!({ "failure": msg }));
            ExitCode::from(1)
        }
        Err(e) => {
            let (kind, line) = error_kind(&e);
            eprintln!(
                "{}",
                json!({ "error": { "kind": kind, "line": line, "message": format!("{e:#}") } })
            );
            ExitCode::from(2)
        }
    }
}
