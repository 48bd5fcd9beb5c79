//! Solution paths of `dX_t = θ(μ + X_t)dt + dG_t`, `X_0 = 0`, and the path
//! functionals consumed by the estimators.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{exp, expm1};

use crate::calculus::{cumulative_trapezoid, trapezoid, GriddedFunction};
use crate::error::{domain, Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;
use crate::sampler::GaussianPath;

/// Largest `θT` for which `e^{θT}` stays comfortably inside double range.
pub const MAX_THETA_T: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VasicekParams {
    theta: f64,
    mu: f64,
    alpha: f64,
}

impl VasicekParams {
    pub fn new(theta: f64, mu: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(domain(format!("theta must be positive and finite, got {theta}")));
        }
        if !mu.is_finite() {
            return Err(domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Self {
            theta,
            mu,
            alpha: theta * mu,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Explicit,
    Euler,
}

impl Scheme {
    pub fn token(self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::Euler => "euler",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "explicit" => Ok(Scheme::Explicit),
            "euler" => Ok(Scheme::Euler),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected explicit or euler)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VasicekPath {
    pub grid: TimeGrid,
    pub params: VasicekParams,
    pub spec: KernelSpec,
    pub values: Vec<f64>,
    pub driver: GaussianPath,
}

impl VasicekPath {
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn as_gridded(&self) -> GriddedFunction {
        GriddedFunction {
            grid: self.grid,
            values: self.values.clone(),
        }
    }
}

/// Path functionals, all by the trapezoid rule on the path's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFunctionals {
    pub x_t: f64,
    pub int_x: f64,
    pub int_x2: f64,
    pub int_sx: f64,
    /// `Σ_t = ∫₀ᵗ X ds` at every node.
    pub sigma: GriddedFunction,
    /// `ζ_T = e^{−θT} G_T + θ Z_T`.
    pub zeta_t: f64,
    /// `Z_T = ∫₀ᵀ e^{−θs} G_s ds`.
    pub z_t: f64,
}

pub fn solve(scheme: Scheme, params: VasicekParams, driver: GaussianPath) -> Result<VasicekPath> {
    match scheme {
        Scheme::Explicit => explicit_solution(params, driver),
        Scheme::Euler => Ok(euler_maruyama(params, driver)),
    }
}

/// `x_{i+1} = x_i + θ(μ + x_i)Δ + (g_{i+1} − g_i)`.
pub fn euler_maruyama(params: VasicekParams, driver: GaussianPath) -> VasicekPath {
    let grid = driver.grid;
    let dt = grid.step();
    let (theta, mu) = (params.theta, params.mu);
    let g = &driver.values;
    let mut x = Vec::with_capacity(g.len());
    x.push(0.0);
    for i in 0..g.len() - 1 {
        let xi = x[i];
        x.push(xi + theta * (mu + xi) * dt + (g[i + 1] - g[i]));
    }
    VasicekPath {
        grid,
        params,
        spec: driver.spec,
        values: x,
        driver,
    }
}

/// `x_t = μ(e^{θt} − 1) + G_t + θ ∫₀ᵗ e^{θ(t−s)} G_s ds`, the variation of
/// constants formula after integrating `∫e^{−θs}dG_s` by parts, so no
/// `dG`-integral appears. The convolution `W_t = ∫₀ᵗ e^{θ(t−s)}G_s ds` is
/// advanced one trapezoid panel at a time, which equals `e^{θt}Z_t` with `Z`
/// the cumulative trapezoid integral of `e^{−θs}G_s`.
pub fn explicit_solution(params: VasicekParams, driver: GaussianPath) -> Result<VasicekPath> {
    let grid = driver.grid;
    let (theta, mu) = (params.theta, params.mu);
    let theta_t = theta * grid.horizon();
    if theta_t > MAX_THETA_T {
        return Err(Error::HorizonTooLarge(theta_t));
    }
    let dt = grid.step();
    let growth = exp(theta * dt);
    let g = &driver.values;
    let mut x = Vec::with_capacity(g.len());
    x.push(0.0);
    let mut w = 0.0;
    for i in 0..g.len() - 1 {
        w = growth * w + 0.5 * dt * (growth * g[i] + g[i + 1]);
        let t = grid.node(i + 1);
        x.push(mu * expm1(theta * t) + g[i + 1] + theta * w);
    }
    Ok(VasicekPath {
        grid,
        params,
        spec: driver.spec,
        values: x,
        driver,
    })
}

pub fn functionals(path: &VasicekPath) -> PathFunctionals {
    let grid = path.grid;
    let dt = grid.step();
    let x = &path.values;
    let theta = path.params.theta;
    let sigma = cumulative_trapezoid(x, dt);
    let int_x = sigma[sigma.len() - 1];
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let sx: Vec<f64> = x.iter().enumerate().map(|(i, v)| grid.node(i) * v).collect();
    let g = &path.driver.values;
    let damped: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(i, v)| exp(-theta * grid.node(i)) * v)
        .collect();
    let z_t = trapezoid(&damped, dt);
    let g_t = g[g.len() - 1];
    PathFunctionals {
        x_t: x[x.len() - 1],
        int_x,
        int_x2: trapezoid(&sq, dt),
        int_sx: trapezoid(&sx, dt),
        sigma: GriddedFunction { grid, values: sigma },
        zeta_t: exp(-theta * grid.horizon()) * g_t + theta * z_t,
        z_t,
    }
}
