//! Experiment configuration files.
//!
//! ```text
//! # comment
//! kernel = fbm:H=0.5
//! theta = 1
//! mu = 2
//! horizon = 4,4096      # repeat for every (T, n) cell
//! horizon = 8,4096
//! replications = 1000
//! base_seed = 20240601
//! scheme = explicit     # optional: explicit | euler
//! sampler = auto        # optional: auto | cholesky | circulant
//! ```
//!
//! Unknown keys, repeated scalar keys and missing required keys are errors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vasicek_core::montecarlo::ExperimentConfig;
use vasicek_core::vasicek::{Scheme, VasicekParams};
use vasicek_core::{Error, KernelSpec, Result};

use crate::engine::SamplerChoice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub kernel: String,
    pub theta: f64,
    pub mu: f64,
    pub horizons: Vec<(f64, usize)>,
    pub replications: usize,
    pub base_seed: u64,
    pub scheme: String,
    pub sampler: String,
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| config_err(line, format!("`{v}` is not a valid value for `{key}`")))
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kernel = None;
        let mut theta = None;
        let mut mu = None;
        let mut horizons = Vec::new();
        let mut replications = None;
        let mut base_seed = None;
        let mut scheme = None;
        let mut sampler = None;

        fn set<T>(slot: &mut Option<T>, line: usize, key: &str, v: T) -> Result<()> {
            if slot.is_some() {
                return Err(config_err(line, format!("`{key}` given twice")));
            }
            *slot = Some(v);
            Ok(())
        }

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kernel" => {
                    let spec: KernelSpec = value.parse()?;
                    set(&mut kernel, line, key, spec.to_string())?
                }
                "theta" => set(&mut theta, line, key, parse_value::<f64>(line, key, value)?)?,
                "mu" => set(&mut mu, line, key, parse_value::<f64>(line, key, value)?)?,
                "horizon" => {
                    let (t, n) = value
                        .split_once(',')
                        .ok_or_else(|| config_err(line, "horizon must be `T,n`"))?;
                    horizons.push((parse_value(line, key, t.trim())?, parse_value(line, key, n.trim())?));
                }
                "replications" => set(&mut replications, line, key, parse_value(line, key, value)?)?,
                "base_seed" => set(&mut base_seed, line, key, parse_value(line, key, value)?)?,
                "scheme" => {
                    let s: Scheme = value.parse()?;
                    set(&mut scheme, line, key, s.to_string())?
                }
                "sampler" => {
                    let s: SamplerChoice = value.parse()?;
                    set(&mut sampler, line, key, s.to_string())?
                }
                other => return Err(config_err(line, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Config(format!("missing required key `{k}`"));
        if horizons.is_empty() {
            return Err(missing("horizon"));
        }
        Ok(Self {
            kernel: kernel.ok_or_else(|| missing("kernel"))?,
            theta: theta.ok_or_else(|| missing("theta"))?,
            mu: mu.ok_or_else(|| missing("mu"))?,
            horizons,
            replications: replications.ok_or_else(|| missing("replications"))?,
            base_seed: base_seed.ok_or_else(|| missing("base_seed"))?,
            scheme: scheme.unwrap_or_else(|| Scheme::default().to_string()),
            sampler: sampler.unwrap_or_else(|| SamplerChoice::default().to_string()),
        })
    }

    /// Canonical text with every default spelled out.
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "kernel = {}", self.kernel).unwrap();
        writeln!(s, "theta = {}", self.theta).unwrap();
        writeln!(s, "mu = {}", self.mu).unwrap();
        for (t, n) in &self.horizons {
            writeln!(s, "horizon = {t},{n}").unwrap();
        }
        writeln!(s, "replications = {}", self.replications).unwrap();
        writeln!(s, "base_seed = {}", self.base_seed).unwrap();
        writeln!(s, "scheme = {}", self.scheme).unwrap();
        writeln!(s, "sampler = {}", self.sampler).unwrap();
        s
    }

    pub fn resolve(&self) -> Result<(ExperimentConfig, SamplerChoice)> {
        let cfg = ExperimentConfig {
            spec: self.kernel.parse()?,
            params: VasicekParams::new(self.theta, self.mu)?,
            horizons: self.horizons.clone(),
            replications: self.replications,
            base_seed: self.base_seed,
            scheme: self.scheme.parse()?,
        };
        cfg.validate()?;
        Ok((cfg, self.sampler.parse()?))
    }
}
