//! Seeded replications of the estimators and per-horizon summaries.
//!
//! Replication `r` of horizon `h` draws its driver from
//! `derive_seed(base_seed, &[h, r])`, so a record depends only on the
//! configuration and its indices. Summaries consume records in ascending
//! `(h, r)` order.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use libm::{exp, pow, sqrt};

use crate::asymptotics::{limit_constants, LimitConstants, RatioLaw};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimateTriple};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;
use crate::rng::derive_seed;
use crate::sampler::{GaussianPath, PathFactor, PathSampler};
use crate::special::normal_cdf;
use crate::stats::{iqr, ks_one_sample, median, moments, spearman};
use crate::vasicek::{solve, Scheme, VasicekParams};

/// Smallest grid accepted for an experiment horizon.
pub const MIN_INTERVALS: usize = 64;

/// Largest tolerated share of degenerate replications in one cell.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: KernelSpec,
    pub params: VasicekParams,
    pub horizons: Vec<(f64, usize)>,
    pub replications: usize,
    pub base_seed: u64,
    pub scheme: Scheme,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config(format!(
                "replications must be at least 2, got {}",
                self.replications
            )));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        for &(t, n) in &self.horizons {
            TimeGrid::new(t, n)?;
            if n < MIN_INTERVALS {
                return Err(Error::Config(format!(
                    "horizon T={t}: n must be at least {MIN_INTERVALS}, got {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self, horizon_index: usize) -> Result<TimeGrid> {
        let (t, n) = self.horizons[horizon_index];
        TimeGrid::new(t, n)
    }

    pub fn child_seed(&self, horizon_index: usize, r: usize) -> u64 {
        derive_seed(self.base_seed, &[horizon_index as u64, r as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Estimated(EstimateTriple),
    Degenerate(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationRecord {
    pub horizon_index: usize,
    pub replication: usize,
    pub seed: u64,
    pub horizon: f64,
    pub intervals: usize,
    pub outcome: Outcome,
}

/// `(e^{θT}(θ̃−θ), T^{1−η}(μ̃−μ), T^{1−η}(α̃−α))`.
pub fn scaled_errors(e: &EstimateTriple, params: &VasicekParams, eta: f64) -> (f64, f64, f64) {
    let t = e.horizon;
    let rate = pow(t, 1.0 - eta);
    (
        exp(params.theta() * t) * (e.theta_hat - params.theta()),
        rate * (e.mu_hat - params.mu()),
        rate * (e.alpha_hat - params.alpha()),
    )
}

impl ReplicationRecord {
    pub fn estimate(&self) -> Option<&EstimateTriple> {
        match &self.outcome {
            Outcome::Estimated(e) => Some(e),
            Outcome::Degenerate(_) => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            Outcome::Estimated(_) => "ok",
            Outcome::Degenerate(_) => "degenerate",
        }
    }
}

/// Runs the estimator on a given driver path. Degenerate paths become
/// records; any other error is returned.
pub fn replicate_on_driver(
    cfg: &ExperimentConfig,
    horizon_index: usize,
    r: usize,
    driver: GaussianPath,
) -> Result<ReplicationRecord> {
    let seed = driver.seed;
    let grid = driver.grid;
    let path = solve(cfg.scheme, cfg.params, driver)?;
    let outcome = match estimate(&path) {
        Ok(e) => Outcome::Estimated(e),
        Err(Error::DegeneratePath(why)) => Outcome::Degenerate(why),
        Err(e) => return Err(e),
    };
    Ok(ReplicationRecord {
        horizon_index,
        replication: r,
        seed,
        horizon: grid.horizon(),
        intervals: grid.intervals(),
        outcome,
    })
}

/// One replication: sample the driver, solve, estimate.
pub fn run_replication(
    cfg: &ExperimentConfig,
    horizon_index: usize,
    r: usize,
    sampler: &dyn PathSampler,
) -> Result<ReplicationRecord> {
    if horizon_index >= cfg.horizons.len() || r >= cfg.replications {
        return Err(Error::Domain(format!(
            "replication ({horizon_index}, {r}) out of range"
        )));
    }
    if *sampler.grid() != cfg.grid(horizon_index)? || *sampler.spec() != cfg.spec {
        return Err(Error::GridMismatch);
    }
    let driver = sampler.sample(cfg.child_seed(horizon_index, r));
    replicate_on_driver(cfg, horizon_index, r, driver)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub mean: f64,
    pub median: f64,
    pub iqr: f64,
}

fn location(xs: &[f64]) -> Location {
    Location {
        mean: moments(xs).mean,
        median: median(xs),
        iqr: iqr(xs),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub horizon: f64,
    pub intervals: usize,
    pub replications: usize,
    pub failures: usize,
    /// Replications whose scaled θ error is not finite.
    pub infinite: usize,
    pub failed_seeds: Vec<u64>,
    pub theta_hat: Location,
    pub mu_hat: Location,
    pub alpha_hat: Location,
    pub median_abs_theta_err: f64,
    pub median_abs_mu_err: f64,
    pub scaled_theta: Vec<f64>,
    pub scaled_mu: Vec<f64>,
    pub scaled_alpha: Vec<f64>,
    /// One-sample KS distances to the limit laws; NaN when fewer than ten
    /// replications succeeded.
    pub ks_theta: f64,
    pub ks_mu: f64,
    pub ks_alpha: f64,
    /// Spearman correlation of the scaled θ and μ errors.
    pub spearman_theta_mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub constants: LimitConstants,
    pub cells: Vec<CellSummary>,
}

/// Summarizes one horizon's records, given in ascending replication order.
pub fn summarize_cell(
    cfg: &ExperimentConfig,
    constants: &LimitConstants,
    records: &[ReplicationRecord],
) -> Result<CellSummary> {
    let first = records
        .first()
        .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let (horizon, intervals) = (first.horizon, first.intervals);
    let mut failed_seeds = Vec::new();
    let mut est = Vec::with_capacity(records.len());
    for rec in records {
        match &rec.outcome {
            Outcome::Estimated(e) => est.push(*e),
            Outcome::Degenerate(_) => failed_seeds.push(rec.seed),
        }
    }
    let failures = failed_seeds.len();
    if failures as f64 > MAX_FAILURE_RATE * records.len() as f64 {
        return Err(Error::TooManyFailures {
            t: horizon,
            n: intervals,
            failures,
            replications: records.len(),
        });
    }
    let p = &cfg.params;
    let pick = |f: fn(&EstimateTriple) -> f64| est.iter().map(f).collect::<Vec<f64>>();
    let theta_hat = pick(|e| e.theta_hat);
    let mu_hat = pick(|e| e.mu_hat);
    let alpha_hat = pick(|e| e.alpha_hat);
    let mut scaled_theta = Vec::with_capacity(est.len());
    let mut scaled_mu = Vec::with_capacity(est.len());
    let mut scaled_alpha = Vec::with_capacity(est.len());
    for e in &est {
        let (a, b, c) = scaled_errors(e, p, constants.eta);
        scaled_theta.push(a);
        scaled_mu.push(b);
        scaled_alpha.push(c);
    }
    let abs_theta: Vec<f64> = theta_hat.iter().map(|v| (v - p.theta()).abs()).collect();
    let abs_mu: Vec<f64> = mu_hat.iter().map(|v| (v - p.mu()).abs()).collect();

    let law = RatioLaw::new(constants, p.mu());
    let mu_sd = sqrt(constants.lambda_sq) / constants.theta;
    let alpha_sd = sqrt(constants.lambda_sq);
    let ks = |xs: &[f64], cdf: &dyn Fn(f64) -> f64| ks_one_sample(xs, cdf).unwrap_or(f64::NAN);
    Ok(CellSummary {
        horizon,
        intervals,
        replications: records.len(),
        failures,
        infinite: scaled_theta.iter().filter(|v| !v.is_finite()).count(),
        failed_seeds,
        theta_hat: location(&theta_hat),
        mu_hat: location(&mu_hat),
        alpha_hat: location(&alpha_hat),
        median_abs_theta_err: median(&abs_theta),
        median_abs_mu_err: median(&abs_mu),
        ks_theta: ks(&scaled_theta, &|x| law.cdf(x)),
        ks_mu: ks(&scaled_mu, &|x| normal_cdf(x / mu_sd)),
        ks_alpha: ks(&scaled_alpha, &|x| normal_cdf(x / alpha_sd)),
        spearman_theta_mu: spearman(&scaled_theta, &scaled_mu).unwrap_or(f64::NAN),
        scaled_theta,
        scaled_mu,
        scaled_alpha,
    })
}

/// Groups records by horizon (they must arrive in ascending `(h, r)` order)
/// and summarizes each cell.
pub fn summarize(
    cfg: &ExperimentConfig,
    constants: LimitConstants,
    records: &[ReplicationRecord],
) -> Result<ExperimentSummary> {
    let cells = (0..cfg.horizons.len())
        .map(|h| {
            let lo = h * cfg.replications;
            summarize_cell(cfg, &constants, &records[lo..lo + cfg.replications])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary { constants, cells })
}

/// Sequential experiment driver; `make_sampler` builds one sampler per
/// horizon, shared by all its replications.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut make_sampler: impl FnMut(KernelSpec, TimeGrid) -> Result<Box<dyn PathSampler>>,
) -> Result<(ExperimentSummary, Vec<ReplicationRecord>)> {
    cfg.validate()?;
    let constants = limit_constants(&cfg.spec, cfg.params.theta())?;
    let mut records = Vec::with_capacity(cfg.horizons.len() * cfg.replications);
    for h in 0..cfg.horizons.len() {
        let sampler = make_sampler(cfg.spec, cfg.grid(h)?)?;
        for r in 0..cfg.replications {
            records.push(run_replication(cfg, h, r, sampler.as_ref())?);
        }
    }
    let summary = summarize(cfg, constants, &records)?;
    Ok((summary, records))
}

/// [`run_experiment_with`] using exact triangular factors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentSummary, Vec<ReplicationRecord>)> {
    run_experiment_with(cfg, |spec, grid| {
        Ok(Box::new(PathFactor::build(spec, grid)?) as Box<dyn PathSampler>)
    })
}
