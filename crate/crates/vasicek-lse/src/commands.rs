//! Command implementations behind the CLI.
//!
//! Each command is a serializable value. Running it yields stdout text plus
//! named output files; when an output directory is given the files are
//! written there together with a `manifest.json` that records the command,
//! which is enough to replay the run bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use vasicek_core::asymptotics::{limit_constants, sample_alpha_limit, sample_joint_limit};
use vasicek_core::estimators::{estimate_values, Variant};
use vasicek_core::montecarlo::scaled_errors;
use vasicek_core::rng::derive_seed;
use vasicek_core::vasicek::{solve, Scheme, VasicekParams};
use vasicek_core::{KernelSpec, TimeGrid};

use crate::config::ExperimentFile;
use crate::engine::{build_sampler, run_experiment, SamplerChoice};
use crate::error::CliError;
use crate::format::{
    constants_row, estimate_fields, num, parse_path_file_name, path_file_name, raw_csv, read_path_csv, summary_csv,
    write_path_csv, CONSTANTS_HEADER, ESTIMATE_HEADER, SCALED_HEADER,
};
use crate::svg::{line_chart, Series};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    pub kernel: String,
    pub theta: f64,
    pub mu: f64,
    pub horizon: f64,
    pub intervals: usize,
    pub seed: u64,
    pub scheme: String,
    pub sampler: String,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateArgs {
    pub file: PathBuf,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub kernel: Option<String>,
    pub seed: Option<u64>,
    pub variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsArgs {
    pub kernel: String,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSampleArgs {
    pub kernel: String,
    pub theta: f64,
    pub mu: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentArgs {
    pub config: ExperimentFile,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Simulate(SimulateArgs),
    Estimate(EstimateArgs),
    Constants(ConstantsArgs),
    LimitSample(LimitSampleArgs),
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub base_seed: Option<u64>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

/// What a command produced: text for stdout and named files.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Command {
    pub fn base_seed(&self) -> Option<u64> {
        match self {
            Command::Simulate(a) => Some(a.seed),
            Command::Estimate(a) => a.seed,
            Command::Constants(_) => None,
            Command::LimitSample(a) => Some(a.seed),
            Command::Experiment(a) => Some(a.config.base_seed),
        }
    }

    /// File name used for the stdout table when an output directory is set.
    fn stdout_file(&self) -> Option<&'static str> {
        match self {
            Command::Estimate(_) => Some("estimate.csv"),
            Command::Constants(_) => Some("constants.csv"),
            Command::LimitSample(_) => Some("limit_sample.csv"),
            Command::Simulate(_) | Command::Experiment(_) => None,
        }
    }

    pub fn run(&self, workers: Option<usize>) -> Result<Output, CliError> {
        match self {
            Command::Simulate(a) => simulate(a),
            Command::Estimate(a) => estimate(a),
            Command::Constants(a) => constants(a),
            Command::LimitSample(a) => limit_sample(a),
            Command::Experiment(a) => experiment(a, workers),
        }
    }

    /// Runs the command and, with an output directory, writes its files and
    /// manifest. Returns the stdout text.
    pub fn execute(&self, out_dir: Option<&Path>, workers: Option<usize>) -> Result<Output, CliError> {
        let start = Instant::now();
        let mut output = self.run(workers)?;
        let Some(dir) = out_dir else {
            return Ok(output);
        };
        if let Some(name) = self.stdout_file() {
            output
                .files
                .push((name.to_string(), output.stdout.clone().into_bytes()));
        }
        fs::create_dir_all(dir)?;
        for (name, bytes) in &output.files {
            fs::write(dir.join(name), bytes)?;
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.clone(),
            base_seed: self.base_seed(),
            outputs: output.files.iter().map(|(n, _)| n.clone()).collect(),
            duration_seconds: start.elapsed().as_secs_f64(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(dir.join(MANIFEST_NAME), json + "\n")?;
        if self.stdout_file().is_none() {
            output.stdout = output
                .files
                .iter()
                .map(|(n, _)| format!("{}\n", dir.join(n).display()))
                .collect();
        }
        Ok(output)
    }
}

/// Loads a manifest from a file or from a directory holding `manifest.json`.
pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let file = if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", file.display())))
}

fn spec(token: &str) -> Result<KernelSpec, CliError> {
    Ok(token.parse::<KernelSpec>()?)
}

fn simulate(a: &SimulateArgs) -> Result<Output, CliError> {
    let spec = spec(&a.kernel)?;
    let params = VasicekParams::new(a.theta, a.mu)?;
    if a.intervals < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {}", a.intervals)));
    }
    let grid = TimeGrid::new(a.horizon, a.intervals)?;
    let scheme: Scheme = a.scheme.parse()?;
    let sampler = build_sampler(spec, grid, a.sampler.parse()?)?;
    let path = solve(scheme, params, sampler.sample(a.seed))?;
    let name = path_file_name(&spec, &grid, a.seed);
    let mut csv = Vec::new();
    write_path_csv(&path, &mut csv)?;
    let mut files = vec![(name.clone(), csv)];
    if a.svg {
        let points = (0..path.values.len()).map(|i| (grid.node(i), path.values[i])).collect();
        let chart = line_chart(
            &format!("{spec}, θ={}, μ={}", a.theta, a.mu),
            "t",
            "X_t",
            &[Series { label: "X_t", points }],
        );
        files.push((name.replace(".csv", ".svg"), chart.into_bytes()));
    }
    Ok(Output {
        stdout: String::new(),
        files,
        warnings: vec![],
    })
}

fn estimate(a: &EstimateArgs) -> Result<Output, CliError> {
    let table = read_path_csv(&a.file)?;
    let variant: Variant = a.variant.parse()?;
    let from_name = a
        .file
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(parse_path_file_name);
    let spec = match &a.kernel {
        Some(k) => Some(spec(k)?),
        None => from_name.map(|(s, _)| s),
    };
    let seed = a.seed.or(from_name.map(|(_, s)| s));
    let e = estimate_values(&table.grid, &table.x, variant)?;
    let mut warnings = Vec::new();
    if variant == Variant::Young && spec.is_none_or(|s| s.gamma() <= 0.5) {
        warnings
            .push("Young variant on a driver with γ ≤ ½ (or unknown kernel): ∫X dX is a formal left-point sum".into());
    }
    let mut header: Vec<&str> = ESTIMATE_HEADER.to_vec();
    let mut row = estimate_fields(seed, spec.as_ref(), (a.theta, a.mu), &e);
    if let (Some(theta), Some(mu)) = (a.theta, a.mu) {
        let spec = spec.ok_or_else(|| {
            CliError::Usage("scaled errors need the kernel: pass --kernel or use a simulate file name".into())
        })?;
        let (x, y, z) = scaled_errors(&e, &VasicekParams::new(theta, mu)?, spec.eta());
        header.extend(SCALED_HEADER);
        row.extend([num(x), num(y), num(z)]);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| CliError::Internal(e.to_string()))?;
    w.write_record(&row).map_err(|e| CliError::Internal(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Output {
        stdout: String::from_utf8_lossy(&bytes).into_owned(),
        files: vec![],
        warnings,
    })
}

fn constants(a: &ConstantsArgs) -> Result<Output, CliError> {
    let spec = spec(&a.kernel)?;
    let c = limit_constants(&spec, a.theta)?;
    Ok(Output {
        stdout: format!("{CONSTANTS_HEADER}\n{}", constants_row(&spec, &c)),
        ..Output::default()
    })
}

fn limit_sample(a: &LimitSampleArgs) -> Result<Output, CliError> {
    let spec = spec(&a.kernel)?;
    let c = limit_constants(&spec, a.theta)?;
    if !a.mu.is_finite() {
        return Err(CliError::Usage(format!("mu must be finite, got {}", a.mu)));
    }
    let mut s = String::new();
    if a.count > 0 {
        s.push_str("index,theta_limit,mu_limit,alpha_limit\n");
        for i in 0..a.count {
            let seed = derive_seed(a.seed, &[i as u64]);
            let (th, mu) = sample_joint_limit(&c, a.mu, seed);
            let al = sample_alpha_limit(&c, seed);
            s.push_str(&format!("{i},{},{},{}\n", num(th), num(mu), num(al)));
        }
    }
    Ok(Output {
        stdout: s,
        ..Output::default()
    })
}

fn experiment(a: &ExperimentArgs, workers: Option<usize>) -> Result<Output, CliError> {
    let (cfg, choice): (_, SamplerChoice) = a.config.resolve()?;
    let (summary, records) = run_experiment(&cfg, choice, workers)?;
    let mut files = vec![
        ("config.txt".to_string(), a.config.render().into_bytes()),
        (
            "raw.csv".to_string(),
            raw_csv(&cfg.spec, &cfg.params, &records).into_bytes(),
        ),
        (
            "summary.csv".to_string(),
            summary_csv(&cfg.spec, &cfg.params, &summary.cells).into_bytes(),
        ),
    ];
    if a.svg {
        let theta: Vec<(f64, f64)> = summary
            .cells
            .iter()
            .map(|c| (c.horizon, c.median_abs_theta_err))
            .collect();
        let mu: Vec<(f64, f64)> = summary.cells.iter().map(|c| (c.horizon, c.median_abs_mu_err)).collect();
        let chart = line_chart(
            &format!("{} median absolute error", cfg.spec),
            "T",
            "median error",
            &[
                Series {
                    label: "|θ̃ − θ|",
                    points: theta,
                },
                Series {
                    label: "|μ̃ − μ|",
                    points: mu,
                },
            ],
        );
        files.push(("errors.svg".to_string(), chart.into_bytes()));
    }
    let failures: usize = summary.cells.iter().map(|c| c.failures).sum();
    let warnings = if failures > 0 {
        vec![format!("{failures} degenerate replications recorded in raw.csv")]
    } else {
        vec![]
    };
    Ok(Output {
        stdout: String::new(),
        files,
        warnings,
    })
}
