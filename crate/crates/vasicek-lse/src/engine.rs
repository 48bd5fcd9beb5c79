//! Parallel experiment execution.
//!
//! Replications of a horizon run on a rayon pool and are collected in
//! replication order, so the records, and every summary computed from them,
//! are identical for any worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use vasicek_core::asymptotics::limit_constants;
use vasicek_core::montecarlo::{run_replication, summarize, ExperimentConfig, ExperimentSummary, ReplicationRecord};
use vasicek_core::sampler::{PathFactor, PathSampler};
use vasicek_core::{Error, Family, KernelSpec, Result, TimeGrid};

use crate::circulant::CirculantFactor;

/// Environment variable consulted when `--workers` is absent.
pub const WORKERS_ENV: &str = "VASICEK_LSE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerChoice {
    /// Circulant embedding for fBm, triangular factor otherwise.
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

impl fmt::Display for SamplerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerChoice::Auto => "auto",
            SamplerChoice::Cholesky => "cholesky",
            SamplerChoice::Circulant => "circulant",
        })
    }
}

impl FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(SamplerChoice::Auto),
            "cholesky" => Ok(SamplerChoice::Cholesky),
            "circulant" => Ok(SamplerChoice::Circulant),
            other => Err(Error::Config(format!(
                "unknown sampler `{other}` (expected auto, cholesky or circulant)"
            ))),
        }
    }
}

pub fn build_sampler(spec: KernelSpec, grid: TimeGrid, choice: SamplerChoice) -> Result<Box<dyn PathSampler>> {
    let circulant = match choice {
        SamplerChoice::Auto => spec.family() == Family::Fbm,
        SamplerChoice::Cholesky => false,
        SamplerChoice::Circulant => true,
    };
    if circulant {
        Ok(Box::new(CirculantFactor::build(spec, grid)?))
    } else {
        Ok(Box::new(PathFactor::build(spec, grid)?))
    }
}

/// Runs `f` on a pool of `workers` threads (`None`: rayon's default).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Records of one horizon, in replication order.
pub fn run_cell(
    cfg: &ExperimentConfig,
    horizon_index: usize,
    sampler: &dyn PathSampler,
) -> Result<Vec<ReplicationRecord>> {
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, horizon_index, r, sampler))
        .collect()
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    choice: SamplerChoice,
    workers: Option<usize>,
) -> Result<(ExperimentSummary, Vec<ReplicationRecord>)> {
    cfg.validate()?;
    let constants = limit_constants(&cfg.spec, cfg.params.theta())?;
    with_workers(workers, || {
        let mut records = Vec::with_capacity(cfg.horizons.len() * cfg.replications);
        for h in 0..cfg.horizons.len() {
            let sampler = build_sampler(cfg.spec, cfg.grid(h)?, choice)?;
            records.extend(run_cell(cfg, h, sampler.as_ref())?);
        }
        let summary = summarize(cfg, constants, &records)?;
        Ok((summary, records))
    })?
}
