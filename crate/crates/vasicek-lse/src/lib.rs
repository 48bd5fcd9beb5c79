//! Simulation, estimation and Monte Carlo tooling for the non-ergodic
//! Gaussian Vasicek model, built on [`vasicek_core`].
//!
//! This crate adds what needs `std`: the FFT-based fBm sampler, a parallel
//! experiment engine, CSV/SVG/JSON output, configuration files and the
//! `vasicek-lse` command line.

pub mod circulant;
pub mod cli;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod format;
pub mod svg;

pub use circulant::CirculantFactor;
pub use engine::{build_sampler, run_experiment, SamplerChoice};
pub use error::CliError;
