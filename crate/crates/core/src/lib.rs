//! Least-squares-type drift estimation for the non-ergodic Gaussian Vasicek
//! model `dX_t = θ(μ + X_t)dt + dG_t`, `X_0 = 0`, `θ > 0`.
//!
//! The crate is `no_std` (it needs `alloc`) and carries everything that is pure
//! computation:
//!
//! - [`kernels`]: covariance functions of fBm, sub-fBm and bi-fBm drivers.
//! - [`sampler`]: exact Gaussian path synthesis by triangular factorization.
//! - [`calculus`]: trapezoidal and left-point Riemann–Stieltjes integration.
//! - [`vasicek`]: Euler–Maruyama and explicit solution paths, path functionals.
//! - [`estimators`]: the extended and Young least-squares estimators, `R_T`.
//! - [`asymptotics`]: closed-form limit constants and limit-law samplers.
//! - [`montecarlo`]: seeded replications and order-stable summaries.
//!
//! IO, the FFT fast path for fBm, parallel execution and the CLI live in the
//! `vasicek-lse` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod calculus;
mod error;
pub mod estimators;
pub mod grid;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod vasicek;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use kernels::{Family, KernelSpec};
