//! Limit constants of the estimators and samplers for their limit laws.
//!
//! With `N₁, N₂ ~ N(0,1)` and `ζ_∞ ~ N(0, Var ζ_∞)` mutually independent:
//!
//! ```text
//! e^{θT}(θ̃ − θ)     →  2θσ_G N₂ / (μ + ζ_∞)
//! T^{1−η}(μ̃ − μ)    →  (λ_G / θ) N₁
//! T^{1−η}(α̃ − α)    →  λ_G N₁
//! ```

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, pow, sqrt};

use crate::calculus::CompensatedSum;
use crate::error::{domain, Result};
use crate::grid::TimeGrid;
use crate::kernels::{Family, KernelSpec};
use crate::quadrature::{integrate_quadrant, tanh_sinh};
use crate::rng::normal_at;
use crate::special::{gamma, normal_cdf};

/// Truncation-sweep tolerance for the bi-fBm `Var ζ_∞` double integral.
pub const VAR_ZETA_TOL: f64 = 1e-8;

/// Grid size used by [`empirical_assumption_check`].
pub const ASSUMPTION_GRID: usize = 4096;

/// Stream positions of the three Gaussians behind one limit draw.
const STREAM_N2: u64 = 0;
const STREAM_ZETA: u64 = 1;
const STREAM_N1: u64 = 2;

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("theta must be positive and finite, got {theta}")))
    }
}

/// `(k_H, l_H, m_H)`: `∬e^{−θ(s+t)} t^{2H}`, `∬e^{−θ(s+t)} |t−s|^{2H}` and
/// `∬e^{−θ(s+t)} (t+s)^{2H}` over the quadrant, in closed form.
pub fn klm_integrals(h: f64, theta: f64) -> Result<(f64, f64, f64)> {
    if !(h > 0.0 && h < 1.0) {
        return Err(domain(format!("H must lie in (0,1), got {h}")));
    }
    check_theta(theta)?;
    let scale = pow(theta, 2.0 * h + 2.0);
    let k = gamma(2.0 * h + 1.0) / scale;
    Ok((k, k, gamma(2.0 * h + 2.0) / scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstants {
    pub theta: f64,
    pub eta: f64,
    pub lambda_sq: f64,
    pub sigma_sq: f64,
    pub var_zeta_inf: f64,
}

/// `λ_G² = lim E[G_T²] / T^{2η}`.
pub fn lambda_sq(spec: &KernelSpec) -> f64 {
    match spec.family() {
        Family::SubFbm => 2.0 - pow(2.0, 2.0 * spec.hurst() - 1.0),
        Family::Fbm | Family::BiFbm => 1.0,
    }
}

/// `σ_G² = lim Var(e^{−θT}∫₀ᵀ e^{θs} dG_s)`.
pub fn sigma_sq(spec: &KernelSpec, theta: f64) -> f64 {
    let g = spec.gamma();
    g * gamma(2.0 * g) / pow(theta, 2.0 * g)
}

/// `θ² ∬ e^{−θ(s+t)} E[G_s G_t] ds dt` by truncated 2-D quadrature.
pub fn var_zeta_quadrature(spec: &KernelSpec, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let v = integrate_quadrant(
        |s, t| exp(-theta * (s + t)) * spec.covariance_unchecked(s, t),
        true,
        VAR_ZETA_TOL,
    )?;
    Ok(theta * theta * v)
}

pub fn limit_constants(spec: &KernelSpec, theta: f64) -> Result<LimitConstants> {
    check_theta(theta)?;
    let h = spec.hurst();
    let sigma_sq = sigma_sq(spec, theta);
    let var_zeta_inf = match spec.family() {
        Family::Fbm => sigma_sq,
        Family::SubFbm => (1.0 - h) * gamma(2.0 * h + 1.0) / pow(theta, 2.0 * h),
        Family::BiFbm if spec.k() == 1.0 => sigma_sq,
        Family::BiFbm => var_zeta_quadrature(spec, theta)?,
    };
    Ok(LimitConstants {
        theta,
        eta: spec.eta(),
        lambda_sq: lambda_sq(spec),
        sigma_sq,
        var_zeta_inf,
    })
}

/// One draw of `2θσ N₂ / (μ + ζ_∞)`. A zero denominator gives `±∞` (or NaN
/// when `σ = 0` as well), which is returned as is.
pub fn sample_theta_limit(c: &LimitConstants, mu: f64, seed: u64) -> f64 {
    let n2 = normal_at(seed, STREAM_N2);
    let zeta = sqrt(c.var_zeta_inf) * normal_at(seed, STREAM_ZETA);
    2.0 * c.theta * sqrt(c.sigma_sq) * n2 / (mu + zeta)
}

/// One draw of `(λ/θ) N₁`.
pub fn sample_mu_limit(c: &LimitConstants, seed: u64) -> f64 {
    sqrt(c.lambda_sq) / c.theta * normal_at(seed, STREAM_N1)
}

/// One draw of `λ N₁`.
pub fn sample_alpha_limit(c: &LimitConstants, seed: u64) -> f64 {
    sqrt(c.lambda_sq) * normal_at(seed, STREAM_N1)
}

/// `(θ-limit, μ-limit)` from a single seed; the coordinates use disjoint
/// stream positions and are therefore independent.
pub fn sample_joint_limit(c: &LimitConstants, mu: f64, seed: u64) -> (f64, f64) {
    (sample_theta_limit(c, mu, seed), sample_mu_limit(c, seed))
}

/// CDF of the θ limit law, `F(x) = E_ζ[Φ(x|μ+ζ| / (2θσ))]`, by conditioning
/// on the denominator. The conditional probability has a kink at the pole
/// `ζ = −μ` that sharpens into a spike as `|x|` grows, so each side of the
/// pole is integrated separately with tanh-sinh, which clusters its nodes at
/// the pole.
#[derive(Debug, Clone)]
pub struct RatioLaw {
    scale: f64,
    mu: f64,
    spread: f64,
}

/// Standard-normal mass beyond this many deviations is below 1e-300.
const RATIO_LAW_TAIL: f64 = 38.0;
const RATIO_LAW_TOL: f64 = 1e-12;

impl RatioLaw {
    pub fn new(c: &LimitConstants, mu: f64) -> Self {
        Self {
            scale: 2.0 * c.theta * sqrt(c.sigma_sq),
            mu,
            spread: sqrt(c.var_zeta_inf),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.scale == 0.0 {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        if self.spread == 0.0 {
            return normal_cdf(x * self.mu.abs() / self.scale);
        }
        let inv_sqrt_2pi = 1.0 / sqrt(2.0 * core::f64::consts::PI);
        let f =
            |z: f64| inv_sqrt_2pi * exp(-0.5 * z * z) * normal_cdf(x * (self.mu + self.spread * z).abs() / self.scale);
        let pole = (-self.mu / self.spread).clamp(-RATIO_LAW_TAIL, RATIO_LAW_TAIL);
        let mut acc = CompensatedSum::new();
        for (a, b) in [(-RATIO_LAW_TAIL, pole), (pole, RATIO_LAW_TAIL)] {
            // the integrand is smooth and bounded on each side, so a refusal to
            // converge can only come from the node-resolution floor
            let part = tanh_sinh(f, a, b, RATIO_LAW_TOL).unwrap_or_else(|_| gauss_legendre_fallback(f, a, b));
            acc.add(part);
        }
        acc.value().clamp(0.0, 1.0)
    }

    /// Inverse CDF by bracketing and bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.cdf(lo) > p {
            lo *= 2.0;
        }
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * mid.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn iqr(&self) -> f64 {
        self.quantile(0.75) - self.quantile(0.25)
    }
}

/// Composite 8-point Gauss–Legendre on 256 panels.
fn gauss_legendre_fallback(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let panels = 256;
    let h = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            acc.add(0.5 * h * w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x)));
        }
    }
    acc.value()
}

pub fn theta_limit_cdf(c: &LimitConstants, mu: f64, x: f64) -> f64 {
    RatioLaw::new(c, mu).cdf(x)
}

/// Exact finite-`T` versions of the quantities whose limits define the
/// assumptions on the driver, one row per horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionRow {
    pub horizon: f64,
    pub intervals: usize,
    /// `E[G_T²] / T^{2η}`, target `λ²`.
    pub growth: f64,
    pub lambda_sq: f64,
    /// `Var(e^{−θT}∫₀ᵀ e^{θs} dG_s)`, target `σ²`.
    pub variance: f64,
    pub sigma_sq: f64,
    /// `E[G_1 G_T] / T^η`, target 0.
    pub cross_fixed: f64,
    /// `E[(G_T/T^η) e^{−θT}∫₀ᵀ e^{θs} dG_s]`, target 0.
    pub cross_terminal: f64,
}

/// Evaluates every row on a grid of [`ASSUMPTION_GRID`] intervals.
pub fn empirical_assumption_check(spec: &KernelSpec, theta: f64, horizons: &[f64]) -> Result<Vec<AssumptionRow>> {
    check_theta(theta)?;
    if horizons.is_empty() {
        return Err(domain("no horizons given"));
    }
    if horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("horizons must be strictly increasing"));
    }
    horizons
        .iter()
        .map(|&t| assumption_row(spec, theta, t, ASSUMPTION_GRID))
        .collect()
}

/// One row on an explicit grid. The `dG`-integral is rewritten by parts,
/// `e^{−θT}∫₀ᵀ e^{θs}dG_s = G_T − θ∫₀ᵀ e^{−θ(T−t)} G_t dt`, so it is a linear
/// functional `Σ c_i G_{t_i}` (trapezoid weights) and every moment is a
/// bilinear form in the Gram matrix.
pub fn assumption_row(spec: &KernelSpec, theta: f64, horizon: f64, intervals: usize) -> Result<AssumptionRow> {
    check_theta(theta)?;
    let grid = TimeGrid::new(horizon, intervals)?;
    let n = grid.intervals();
    let dt = grid.step();
    let eta = spec.eta();
    let nodes: Vec<f64> = (1..=n).map(|i| grid.node(i)).collect();
    // c over t_1..t_n; t_0 carries G_0 = 0 and drops out
    let mut c: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = if i + 1 == n { 0.5 * dt } else { dt };
            -theta * w * exp(-theta * (horizon - t))
        })
        .collect();
    c[n - 1] += 1.0;

    let mut quad = CompensatedSum::new();
    let mut with_terminal = CompensatedSum::new();
    for i in 0..n {
        let ti = nodes[i];
        let mut row = 0.0;
        for j in 0..i {
            row += c[j] * spec.covariance_unchecked(nodes[j], ti);
        }
        let diag = spec.covariance_unchecked(ti, ti);
        quad.add(c[i] * (2.0 * row + c[i] * diag));
        with_terminal.add(c[i] * spec.covariance_unchecked(ti, horizon));
    }
    let t_eta = pow(horizon, eta);
    Ok(AssumptionRow {
        horizon,
        intervals: n,
        growth: spec.covariance_unchecked(horizon, horizon) / (t_eta * t_eta),
        lambda_sq: lambda_sq(spec),
        variance: quad.value(),
        sigma_sq: sigma_sq(spec, theta),
        cross_fixed: spec.covariance_unchecked(1.0, horizon) / t_eta,
        cross_terminal: with_terminal.value() / t_eta,
    })
}
