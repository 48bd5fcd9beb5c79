//! Least-squares-type drift estimators
//!
//! ```text
//! θ̃ = (½T X_T² − X_T ∫X) / (T ∫X² − (∫X)²)
//! α̃ = (X_T ∫X² − ½X_T² ∫X) / (T ∫X² − (∫X)²),   μ̃ = α̃ / θ̃
//! ```
//!
//! and their Young counterparts with `½X_T²` replaced by `∫X dX`.
//!
//! Paths grow like `e^{θt}`, so the sums are formed on `x / max|x|`: `θ̃` is
//! invariant under that scaling and `α̃` scales linearly, which keeps every
//! intermediate finite up to the `θT ≤ 700` envelope.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use libm::exp;

use crate::calculus::{left_point_sum, trapezoid, CompensatedSum};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::vasicek::VasicekPath;

/// Relative tolerance for the Cauchy–Schwarz denominator.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Extended,
    Young,
}

impl Variant {
    pub fn token(self) -> &'static str {
        match self {
            Variant::Extended => "extended",
            Variant::Young => "young",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "extended" => Ok(Variant::Extended),
            "young" => Ok(Variant::Young),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateTriple {
    pub theta_hat: f64,
    pub mu_hat: f64,
    /// Stored as `mu_hat * theta_hat`.
    pub alpha_hat: f64,
    pub horizon: f64,
    pub intervals: usize,
    pub variant: Variant,
    /// Young variant on a driver with `γ ≤ ½`, where `∫X dX` has no Young
    /// meaning and the estimate is a formal left-point sum.
    pub flagged: bool,
}

/// Estimates from raw node values `x_0..x_n` on `grid`.
pub fn estimate_values(grid: &TimeGrid, x: &[f64], variant: Variant) -> Result<EstimateTriple> {
    if x.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::DegeneratePath("path is identically zero"));
    }
    if !scale.is_finite() {
        return Err(Error::DegeneratePath("path is not finite"));
    }
    let xs: alloc::vec::Vec<f64> = x.iter().map(|v| v / scale).collect();
    let dt = grid.step();
    let t = grid.horizon();
    let x_t = xs[xs.len() - 1];
    let int_x = trapezoid(&xs, dt);
    let sq: alloc::vec::Vec<f64> = xs.iter().map(|v| v * v).collect();
    let int_x2 = trapezoid(&sq, dt);
    let half_sq = match variant {
        Variant::Extended => 0.5 * x_t * x_t,
        Variant::Young => left_point_sum(&xs, &xs),
    };

    let t_int_x2 = t * int_x2;
    let den = t_int_x2 - int_x * int_x;
    if !(den > DEGENERACY_TOL * t_int_x2) {
        return Err(Error::DegeneratePath("T·∫X² − (∫X)² vanishes"));
    }
    let theta_hat = (t * half_sq - x_t * int_x) / den;
    if theta_hat == 0.0 {
        return Err(Error::DegeneratePath("θ̃ = 0"));
    }
    let alpha_raw = scale * ((x_t * int_x2 - half_sq * int_x) / den);
    let mu_hat = alpha_raw / theta_hat;
    Ok(EstimateTriple {
        theta_hat,
        mu_hat,
        alpha_hat: mu_hat * theta_hat,
        horizon: t,
        intervals: grid.intervals(),
        variant,
        flagged: false,
    })
}

pub fn estimate(path: &VasicekPath) -> Result<EstimateTriple> {
    estimate_values(&path.grid, &path.values, Variant::Extended)
}

pub fn estimate_young(path: &VasicekPath) -> Result<EstimateTriple> {
    let mut e = estimate_values(&path.grid, &path.values, Variant::Young)?;
    e.flagged = path.spec.gamma() <= 0.5;
    Ok(e)
}

/// `R_T = ½G_T² − μG_T − (G_T/T)∫X − θ∫G² + θ²∫₀ᵀ G_t N_t dt` with
/// `N_t = e^{−θt}∫₀ᵗ e^{θs}G_s ds`, which is advanced by one damped trapezoid
/// panel per step and never leaves double range.
pub fn remainder_rt(path: &VasicekPath) -> f64 {
    let grid = path.grid;
    let dt = grid.step();
    let t = grid.horizon();
    let (theta, mu) = (path.params.theta(), path.params.mu());
    let g = &path.driver.values;
    let g_t = g[g.len() - 1];
    let decay = exp(-theta * dt);

    let mut n_t = 0.0;
    let mut cross = alloc::vec::Vec::with_capacity(g.len());
    cross.push(0.0);
    for i in 0..g.len() - 1 {
        n_t = decay * n_t + 0.5 * dt * (decay * g[i] + g[i + 1]);
        cross.push(g[i + 1] * n_t);
    }
    let sq: alloc::vec::Vec<f64> = g.iter().map(|v| v * v).collect();
    let int_x = trapezoid(&path.values, dt);

    let mut acc = CompensatedSum::new();
    acc.add(0.5 * g_t * g_t);
    acc.add(-mu * g_t);
    acc.add(-(g_t / t) * int_x);
    acc.add(-theta * trapezoid(&sq, dt));
    acc.add(theta * theta * trapezoid(&cross, dt));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::sampler::GaussianPath;
    use crate::vasicek::{explicit_solution, VasicekParams};
    use alloc::string::ToString;

    fn driver_free(theta: f64, mu: f64, t: f64, n: usize) -> VasicekPath {
        let grid = TimeGrid::new(t, n).unwrap();
        let d = GaussianPath::zero(grid, KernelSpec::fbm(0.5).unwrap());
        explicit_solution(VasicekParams::new(theta, mu).unwrap(), d).unwrap()
    }

    #[test]
    fn zero_path_is_degenerate() {
        let p = driver_free(1.0, 0.0, 1.0, 10);
        assert!(matches!(estimate(&p), Err(Error::DegeneratePath(_))));
        assert!(matches!(estimate_young(&p), Err(Error::DegeneratePath(_))));
    }

    #[test]
    fn constant_path_is_degenerate() {
        let grid = TimeGrid::new(2.0, 16).unwrap();
        let x = alloc::vec![3.0; 17];
        assert!(matches!(
            estimate_values(&grid, &x, Variant::Extended),
            Err(Error::DegeneratePath(_))
        ));
    }

    #[test]
    fn driver_free_recovers_parameters() {
        let p = driver_free(1.0, 1.0, 10.0, 1 << 14);
        let e = estimate(&p).unwrap();
        assert!((0.99..=1.01).contains(&e.theta_hat), "{e:?}");
        assert!((0.9..=1.1).contains(&e.mu_hat), "{e:?}");
        assert_eq!(e.alpha_hat, e.mu_hat * e.theta_hat);
    }

    #[test]
    fn direct_mu_formula_agrees() {
        let p = driver_free(0.7, -1.3, 6.0, 2048);
        let e = estimate(&p).unwrap();
        let dt = p.grid.step();
        let x = &p.values;
        let x_t = *x.last().unwrap();
        let int_x = trapezoid(x, dt);
        let sq: alloc::vec::Vec<f64> = x.iter().map(|v| v * v).collect();
        let int_x2 = trapezoid(&sq, dt);
        let direct = (x_t * int_x2 - 0.5 * x_t * x_t * int_x) / (0.5 * 6.0 * x_t * x_t - x_t * int_x);
        assert!(((e.mu_hat - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn remainder_vanishes_without_driver() {
        assert_eq!(remainder_rt(&driver_free(1.0, 2.0, 5.0, 100)), 0.0);
    }

    #[test]
    fn variants_parse() {
        assert_eq!("young".parse::<Variant>().unwrap(), Variant::Young);
        assert_eq!(Variant::Extended.to_string(), "extended");
    }
}
