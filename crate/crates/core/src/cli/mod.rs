//! Command-line front end: argument parsing, config merging, and the
//! 0 / 2 / 1 exit-code convention (pass / check failure / error).

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::geometry::Dim;

pub use config::{ExperimentConfig, Settings, SubcommandKind};
pub use report::{Cell, Check, RunReport};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STARTRACE_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "startrace-out";

#[derive(Debug, Parser)]
#[command(
    name = "startrace",
    version,
    about = "Trace, coarea and Dirichlet experiments on star-shaped surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pullback measure of the surface against the sphere area.
    SphereCheck(RunArgs),
    /// Trace-to-Sobolev ratios on a bounded star domain.
    TraceDomain(RunArgs),
    /// Decay, unitarity and Hölder experiments for traces on R^n.
    TraceRn(RunArgs),
    /// The kernel K_s(δ) and its power-law regimes.
    KernelBound(RunArgs),
    /// Volumes, level-set derivatives and full-space integrals.
    Coarea(RunArgs),
    /// Convergence study of the embedded-boundary Dirichlet solver.
    Dirichlet(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML experiment config; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $STARTRACE_OUT_DIR, then ./startrace-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Profile shorthand, e.g. `constant:1`, `cusp:1,0,0.3`, `trig:1,0.3`.
    #[arg(long)]
    profile: Option<String>,
    /// Test function shorthand, e.g. `gaussian:0.5`; repeatable.
    #[arg(long = "function")]
    functions: Vec<String>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// List such as `2,4,8` or `2^1..2^5`.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    rho0: Option<f64>,
    /// List such as `2^-4..2^-14`.
    #[arg(long)]
    deltas: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    family_size: Option<usize>,
    /// `zero`, `field:<function>` or `helmholtz:<function>`.
    #[arg(long)]
    forcing: Option<String>,
    /// Boundary-data carrier q, as a function shorthand.
    #[arg(long)]
    carrier: Option<String>,
    /// Grid spacings, e.g. `2^-4..2^-7`.
    #[arg(long)]
    h: Option<String>,
    /// `fine-grid`, `disk-bessel:<R>` or `exact:<function>`.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Record wall-clock time in the JSON report (outputs then differ between runs).
    #[arg(long)]
    record_timing: bool,
}

fn build_config(kind: SubcommandKind, a: &RunArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let c = ExperimentConfig::from_toml(&text)?;
            if c.subcommand != kind {
                return Err(Error::Config {
                    field: "subcommand",
                    message: format!("config is for `{}`, but `{kind}` was requested", c.subcommand),
                });
            }
            c
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(d) = a.dim {
        c.dim = Some(Dim::try_from(d)?);
    }
    if let Some(p) = &a.profile {
        c.profile = Some(p.parse()?);
    }
    if !a.functions.is_empty() {
        c.functions = a.functions.iter().map(|f| f.parse()).collect::<Result<_>>()?;
    }
    c.resolution = a.resolution.or(c.resolution);
    c.seed = a.seed.or(c.seed);
    c.s = a.s.or(c.s);
    c.p = a.p.or(c.p);
    c.rho0 = a.rho0.or(c.rho0);
    c.samples = a.samples.or(c.samples);
    c.family_size = a.family_size.or(c.family_size);
    c.tolerance = a.tolerance.or(c.tolerance);
    let list = |s: &Option<String>| s.as_deref().map(config::parse_list).transpose();
    if let Some(v) = list(&a.rho)? {
        c.rho = Some(v);
    }
    if let Some(v) = list(&a.deltas)? {
        c.deltas = Some(v);
    }
    if let Some(v) = list(&a.lambda)? {
        c.lambda = Some(v);
    }
    if let Some(v) = list(&a.h)? {
        c.h = Some(v);
    }
    if let Some(f) = &a.forcing {
        c.forcing = Some(config::parse_forcing(f)?);
    }
    if let Some(q) = &a.carrier {
        c.carrier = Some(q.parse()?);
    }
    if let Some(r) = &a.reference {
        c.reference = Some(config::parse_reference(r)?);
    }
    if let Some(o) = &a.out {
        c.out_dir = Some(o.clone());
    }
    Ok(c)
}

fn out_dir(c: &ExperimentConfig) -> PathBuf {
    c.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Validates, runs and writes one experiment; returns the report.
pub fn execute(config: &ExperimentConfig, record_timing: bool) -> Result<RunReport> {
    let settings = Settings::validate(config)?;
    let start = Instant::now();
    let mut outcome = commands::run(&settings)?;
    if record_timing {
        outcome.report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    let dir = out_dir(config);
    let stem = config.subcommand.name();
    let (csv, json) = outcome.report.write(&dir, stem)?;
    for (name, columns, rows) in &outcome.tables {
        report::write_table(&dir.join(format!("{name}.csv")), columns, rows)?;
    }
    eprintln!("wrote {} and {}", csv.display(), json.display());
    Ok(outcome.report)
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = match &cli.command {
        Command::SphereCheck(a) => (SubcommandKind::SphereCheck, a),
        Command::TraceDomain(a) => (SubcommandKind::TraceDomain, a),
        Command::TraceRn(a) => (SubcommandKind::TraceRn, a),
        Command::KernelBound(a) => (SubcommandKind::KernelBound, a),
        Command::Coarea(a) => (SubcommandKind::Coarea, a),
        Command::Dirichlet(a) => (SubcommandKind::Dirichlet, a),
    };
    let result = build_config(kind, args).and_then(|c| execute(&c, args.record_timing));
    match result {
        Ok(report) => {
            for c in &report.checks {
                println!(
                    "{} {} value={:?} target={:?} tolerance={:?}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.target,
                    c.tolerance
                );
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            if report.all_passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
