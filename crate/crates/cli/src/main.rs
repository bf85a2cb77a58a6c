// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use btriple::config::{load_config, ModelConfig};
use btriple::report::{Format, Report};
use btriple::{Error, Execution};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

mod tasks;

/// Exit codes.
const EXIT_OK: u8 = 0;
const EXIT_RUNTIME: u8 = 1;
const EXIT_CHECKS_FAILED: u8 = 2;
const EXIT_BAD_CONFIG: u8 = 3;

/// Environment override for the tolerance multiplier.
const TOL_ENV: &str = "BTRIPLE_TOL_SCALE";

#[derive(Parser, Debug)]
#[command(
    name = "btriple",
    version,
    about = "Boundary triples, Dirichlet-to-Neumann maps and Krein formulas on metric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Model configuration (JSON).
    #[arg(short = 'm', long = "model")]
    model: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Add wall-clock timings to the report (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
    /// Run every grid on the calling thread.
    #[arg(long)]
    sequential: bool,
    /// Multiplies every tolerance; overrides BTRIPLE_TOL_SCALE.
    #[arg(long)]
    tol_scale: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dtn,
    Direct,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    One,
    Random,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    DecLumped,
    FemP1,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxArg {
    Stiffness,
    Consistent,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the identity suite on the model.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Tabulate Λ(z) over a set of spectral points.
    Dtn {
        #[command(flatten)]
        common: Common,
        /// Spectral point as `re` or `re,im`; repeatable.
        #[arg(long = "z", allow_hyphen_values = true)]
        z: Vec<String>,
        /// Rectangular grid: re_min re_max n_re im_min im_max n_im.
        #[arg(long, num_args = 6, allow_negative_numbers = true)]
        grid: Option<Vec<f64>>,
        /// Flux used for discrete models.
        #[arg(long, value_enum, default_value_t = FluxArg::Consistent)]
        flux: FluxArg,
    },
    /// Robin eigenvalues from Λ(z) - B̃, from the vertex system, or both.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// `zero`, `identity`, a real scalar, or a JSON matrix.
        #[arg(long, default_value = "zero", allow_hyphen_values = true)]
        robin: String,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-5.0, 25.0])]
        window: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Krein resolvent formula residuals over a grid of complex points.
    Krein {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "zero", allow_hyphen_values = true)]
        robin: String,
        #[arg(long, value_enum, default_value_t = Probe::One)]
        probe: Probe,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Checks of the Dirac-type operator's boundary triple (interval models).
    Dirac {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Convergence of discrete flux DtN matrices to the continuum.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 1.., default_values_t = [8, 16, 32])]
        levels: Vec<usize>,
        #[arg(long = "z", default_value = "-1", allow_hyphen_values = true)]
        z: String,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long, value_enum, default_value_t = FluxArg::Consistent)]
        flux: FluxArg,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Verify { common, .. }
            | Command::Dtn { common, .. }
            | Command::Spectrum { common, .. }
            | Command::Krein { common, .. }
            | Command::Dirac { common, .. }
            | Command::Converge { common, .. } => common,
        }
    }
}

/// Settings shared by every task.
pub struct Context {
    pub config: ModelConfig,
    pub tolerance_scale: f64,
    pub exec: Execution,
}

fn tolerance_scale(flag: Option<f64>) -> Result<f64, Error> {
    let scale = match flag {
        Some(s) => s,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| Error::config(TOL_ENV, format!("not a number: {v:?}")))?,
            Err(_) => 1.0,
        },
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::config("tol_scale", "must be a positive number"));
    }
    Ok(scale)
}

fn run(cli: Cli) -> Result<Report, Error> {
    let common = cli.command.common().clone();
    let ctx = Context {
        config: load_config(&common.model)?,
        tolerance_scale: tolerance_scale(common.tol_scale)?,
        exec: if common.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Verify { samples, seed, .. } => tasks::verify(&ctx, *samples, *seed)?,
        Command::Dtn { z, grid, flux, .. } => tasks::dtn(&ctx, z, grid.as_deref(), *flux)?,
        Command::Spectrum { robin, window, method, .. } => {
            tasks::spectrum(&ctx, robin, (window[0], window[1]), *method)?
        }
        Command::Krein { robin, probe, seed, .. } => tasks::krein(&ctx, robin, *probe, *seed)?,
        Command::Dirac { samples, seed, .. } => tasks::dirac(&ctx, *samples, *seed)?,
        Command::Converge { levels, z, scheme, flux, .. } => tasks::converge(&ctx, levels, z, *scheme, *flux)?,
    };
    if common.timings {
        report.timings = Some([("total_seconds".to_string(), start.elapsed().as_secs_f64())].into_iter().collect());
    }
    if let serde_json::Value::Object(map) = &mut report.config {
        map.insert("tolerance_scale".into(), json!(ctx.tolerance_scale));
    }
    Ok(report)
}

fn write_report(report: &Report, common: &Common) -> io::Result<()> {
    let format = match common.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    match &common.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            report.write(&mut out, format)?;
            out.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            report.write(&mut out, format)?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = cli.command.common().clone();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config() { EXIT_BAD_CONFIG } else { EXIT_RUNTIME });
        }
    };
    if let Err(e) = write_report(&report, &common) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    for check in report.checks.iter().filter(|c| !c.passed()) {
        log::warn!("check {} failed (residual {:e}, tolerance {:e})", check.name, check.residual, check.tolerance);
    }
    ExitCode::from(if report.passed() { EXIT_OK } else { EXIT_CHECKS_FAILED })
}
