#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kronred::SamplingPlan;
use kronred_cli::commands::{self, CurveOptions, ReduceOptions};
use kronred_cli::{CliError, EXIT_USAGE};

/// Kron reduction of nonlinear static networks.
#[derive(Debug, Parser)]
#[command(name = "kronred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a network file and print a diagnostic report.
    Check {
        /// Network file (TOML).
        file: PathBuf,
    },
    /// Eliminate the central nodes for given boundary values.
    Solve {
        file: PathBuf,
        /// Boundary value `name=value`; repeat or comma-separate.
        #[arg(long = "set", value_name = "NAME=VALUE", required = true)]
        set: Vec<String>,
    },
    /// Reduce to the boundary nodes and write the reduced network.
    Reduce {
        file: PathBuf,
        /// Random boundary samples used to infer the reduced graph.
        #[arg(long, default_value_t = SamplingPlan::default().count)]
        samples: usize,
        /// Boundary samples are drawn from [-range, range].
        #[arg(long, default_value_t = SamplingPlan::default().range)]
        range: f64,
        /// Seed of the sampling plan; equal seeds give identical output.
        #[arg(long, default_value_t = SamplingPlan::default().seed)]
        seed: u64,
        /// Grid points per reduced edge.
        #[arg(long, default_value_t = SamplingPlan::default().table_points)]
        table_points: usize,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective two-terminal curve as CSV `V,I,Ghat`.
    Curve {
        file: PathBuf,
        /// Terminal node names `a,b`; `V` is applied at `a`, `b` is grounded.
        #[arg(long)]
        pair: String,
        /// First voltage of the uniform grid.
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        vmin: f64,
        /// Last voltage of the uniform grid.
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        vmax: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power balance and the minimum-dissipation check.
    Power {
        file: PathBuf,
        /// Boundary value `name=value`; repeat or comma-separate.
        #[arg(long = "set", value_name = "NAME=VALUE", required = true)]
        set: Vec<String>,
        /// Homogeneity degree of K required by the minimization check.
        #[arg(long, default_value_t = 2.0)]
        degree: f64,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("KRONRED_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("KRONRED_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let code = match cli.command {
        Command::Check { file } => commands::check(&file, &mut out)?,
        Command::Solve { file, set } => commands::solve(&file, &set, &mut out)?,
        Command::Reduce { file, samples, range, seed, table_points, out: path } => {
            let plan = SamplingPlan { count: samples, range, seed, table_points, ..SamplingPlan::default() };
            if plan.count < 2 || !(plan.range > 0.0) || plan.table_points < 2 {
                return Err(CliError::Usage("need --samples >= 2, --range > 0 and --table-points >= 2".into()));
            }
            commands::reduce(&file, &ReduceOptions { plan, out: path }, &mut out, &mut err)?
        }
        Command::Curve { file, pair, vmin, vmax, points, out: path } => {
            commands::curve(&file, &CurveOptions { pair, vmin, vmax, points, out: path }, &mut out, &mut err)?
        }
        Command::Power { file, set, degree } => commands::power(&file, &set, degree, &mut out)?,
    };
    out.flush().map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kronred: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
