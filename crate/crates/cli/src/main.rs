use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nek_cli::config::validate_aspects;
use nek_cli::output::{timestamp, write_outputs};
use nek_cli::{config_hash, run, CliError, Command, ExperimentConfig, RunOptions};
use nek_core::green_kernel::SignConvention;

/// Narrow escape times in a ball: asymptotic constants, disk operator
/// diagnostics and Monte Carlo cross-checks. Batch tool; there is no
/// interactive mode.
#[derive(Parser)]
#[command(name = "nek", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed; overrides `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, env = "NEK_THREADS")]
    threads: Option<usize>,
    /// Double every disk quadrature order as a self-check.
    #[arg(long, global = true)]
    order_doubled: bool,
    /// Sign of the mean curvature / drift coupling in the log term.
    #[arg(long, global = true, default_value = "theorem", value_parser = ["theorem", "section4"])]
    sign_convention: String,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Escape time expansion per (eps, a).
    Constants,
    /// K_a, the two disk integrals and the R_F residual per aspect ratio.
    Operators {
        /// Aspect ratios; overrides `operators.a`.
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
    },
    /// Averaged asymptotic escape time against Monte Carlo.
    Compare,
    /// Singular terms of the boundary kernel along a ray from the window centre.
    Kernel {
        /// Direction in the tangent plane, radians from the first principal axis.
        #[arg(long)]
        direction_angle: Option<f64>,
        /// Geodesic distances; overrides `kernel.distances`.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
    },
    /// Fully absorbing sphere calibration of the Monte Carlo oracle.
    McCalibrate,
}

fn execute(cli: Cli) -> Result<PathBuf, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Output(format!("thread pool: {e}")))?;
    }
    let command = match &cli.command {
        Sub::Constants => Command::Constants,
        Sub::Operators { .. } => Command::Operators,
        Sub::Compare => Command::Compare,
        Sub::Kernel { .. } => Command::Kernel,
        Sub::McCalibrate => Command::McCalibrate,
    };
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None if matches!(command, Command::Operators | Command::McCalibrate) => ExperimentConfig::default(),
        None => return Err(CliError::Config(format!("--config: required by '{}'", command.name()))),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    match &cli.command {
        Sub::Operators { a: Some(a) } => {
            validate_aspects("--a", a)?;
            cfg.operators_a = a.clone();
        }
        Sub::Kernel {
            direction_angle,
            distances,
        } => {
            if let Some(x) = direction_angle {
                cfg.kernel.direction_angle = *x;
            }
            if let Some(d) = distances {
                if d.is_empty() || d.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    return Err(CliError::Config("--distances: must be positive numbers".into()));
                }
                cfg.kernel.distances = d.clone();
            }
        }
        _ => {}
    }
    let opts = RunOptions {
        convention: cli.sign_convention.parse::<SignConvention>()?,
        order_doubled: cli.order_doubled,
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.outputs.directory.clone())
        .unwrap_or_else(|| PathBuf::from("nek-out"));
    let started = timestamp();
    let hash = config_hash(command, &cfg, &opts);
    let out = run(command, &cfg, &opts)?;
    if let Some((_, csv)) = out.files.first() {
        print!("{}", String::from_utf8_lossy(csv));
    }
    write_outputs(&dir, command.name(), hash, started, &out)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(manifest) => {
            eprintln!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("nek: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("nek: {e}");
            ExitCode::FAILURE
        }
    }
}
