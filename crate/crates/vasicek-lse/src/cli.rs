//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{
    load_manifest, Command, ConstantsArgs, EstimateArgs, ExperimentArgs, LimitSampleArgs, SimulateArgs,
};
use crate::config::ExperimentFile;
use crate::engine::WORKERS_ENV;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "vasicek-lse",
    version,
    about = "Simulation and drift estimation for the non-ergodic Gaussian Vasicek model"
)]
pub struct Cli {
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory for output files and manifest.json.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Simulate a driver and solution path, write `t,g,x` CSV.
    Simulate {
        /// Kernel token, e.g. `fbm:H=0.7` or `bifbm:H=0.6,K=0.8`.
        kernel: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        mu: f64,
        /// Horizon T.
        #[arg(long = "T", visible_alias = "horizon")]
        horizon: f64,
        /// Number of grid intervals.
        #[arg(long = "n", visible_alias = "intervals")]
        intervals: usize,
        #[arg(long)]
        seed: u64,
        /// explicit | euler
        #[arg(long, default_value = "explicit")]
        scheme: String,
        /// auto | cholesky | circulant
        #[arg(long, default_value = "auto")]
        sampler: String,
        /// Also write an SVG plot of X_t.
        #[arg(long)]
        svg: bool,
        /// Output directory.
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Estimate (θ, μ, α) from a path CSV.
    Estimate {
        file: PathBuf,
        /// True θ, for scaled errors.
        #[arg(long)]
        theta: Option<f64>,
        /// True μ, for scaled errors.
        #[arg(long)]
        mu: Option<f64>,
        /// Kernel token (default: parsed from the file name).
        #[arg(long)]
        kernel: Option<String>,
        /// Seed column value (default: parsed from the file name).
        #[arg(long)]
        seed: Option<u64>,
        /// extended | young
        #[arg(long, default_value = "extended")]
        variant: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Print the limit constants of a kernel.
    Constants {
        kernel: String,
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Draw from the limit laws of the scaled estimation errors.
    LimitSample {
        kernel: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a Monte Carlo experiment from a config file.
    Experiment {
        config: PathBuf,
        /// Also write errors.svg.
        #[arg(long)]
        svg: bool,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        /// manifest.json, or the directory holding it.
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Resolves parsed arguments into a command and its output directory.
pub fn resolve(sub: Sub) -> Result<(Command, Option<PathBuf>), CliError> {
    Ok(match sub {
        Sub::Simulate {
            kernel,
            theta,
            mu,
            horizon,
            intervals,
            seed,
            scheme,
            sampler,
            svg,
            out,
        } => (
            Command::Simulate(SimulateArgs {
                kernel,
                theta,
                mu,
                horizon,
                intervals,
                seed,
                scheme,
                sampler,
                svg,
            }),
            Some(out),
        ),
        Sub::Estimate {
            file,
            theta,
            mu,
            kernel,
            seed,
            variant,
            out,
        } => (
            Command::Estimate(EstimateArgs {
                file,
                theta,
                mu,
                kernel,
                seed,
                variant,
            }),
            out.out,
        ),
        Sub::Constants { kernel, theta, out } => (Command::Constants(ConstantsArgs { kernel, theta }), out.out),
        Sub::LimitSample {
            kernel,
            theta,
            mu,
            count,
            seed,
            out,
        } => (
            Command::LimitSample(LimitSampleArgs {
                kernel,
                theta,
                mu,
                count,
                seed,
            }),
            out.out,
        ),
        Sub::Experiment { config, svg, out } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            let config =
                ExperimentFile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            (Command::Experiment(ExperimentArgs { config, svg }), Some(out))
        }
        Sub::Replay { manifest, out } => (load_manifest(&manifest)?.command, Some(out)),
    })
}

/// Entry point shared by the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(cli.command).and_then(|(cmd, out)| cmd.execute(out.as_deref(), cli.workers));
    match result {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", output.stdout);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
