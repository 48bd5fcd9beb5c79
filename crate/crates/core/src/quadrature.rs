//! Double-exponential (tanh-sinh) quadrature and the truncated improper
//! double integrals `∫₀^∞∫₀^∞ e^{−θs}e^{−θt} c(s,t) ds dt` used for limit
//! constants.
//!
//! Integrands here have algebraic endpoint singularities (`t^{2H}` at the
//! origin, `|t−s|^{2H}` on the diagonal), which tanh-sinh handles without
//! special treatment as long as every singularity sits on a panel endpoint.

use alloc::vec::Vec;

use libm::{cosh, exp, sinh};

use crate::error::{Error, Result};

const MAX_LEVEL: u32 = 12;
const MIN_LEVEL: u32 = 3;
// Far enough that the neglected tail of an `x^{-1/2}` endpoint singularity is
// below 1e-30 of the panel length.
const TAU_MAX: f64 = 4.5;
const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;

/// Tanh-sinh rule on `[a, b]`, refining the step until two successive levels
/// agree to `rel_tol`.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // Panels a few ulps wide cannot be refined; their nodes collapse onto the
    // endpoints.
    if (b - a).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(0.5 * (b - a) * (f(a) + f(b)));
    }
    let half = 0.5 * (b - a);
    let resolution = 1e3 * f64::EPSILON * a.abs().max(b.abs()) / (b - a).abs();
    let mut eval = |tau: f64| -> (f64, f64) {
        let u = HALF_PI * sinh(tau);
        let e = exp(-2.0 * u.abs());
        // distance from the nearer endpoint, computed without cancellation
        let d = (b - a) * e / (1.0 + e);
        let x = if u < 0.0 { a + d } else { b - d };
        let ch = cosh(u);
        let w = half * HALF_PI * cosh(tau) / (ch * ch);
        if w == 0.0 {
            (0.0, 0.0)
        } else {
            let v = w * f(x);
            (v, v.abs())
        }
    };

    let mut h = 1.0f64;
    let (mut sum, mut abs_sum) = eval(0.0);
    let mut add = |t: f64, sum: &mut f64, abs_sum: &mut f64| {
        let (p, pa) = eval(t);
        let (m, ma) = eval(-t);
        *sum += p + m;
        *abs_sum += pa + ma;
    };
    let mut k = 1;
    while k as f64 * h <= TAU_MAX {
        add(k as f64 * h, &mut sum, &mut abs_sum);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut last_change = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= TAU_MAX {
            add(k as f64 * h, &mut sum, &mut abs_sum);
            k += 2;
        }
        let refined = sum * h;
        // measured against ∫|f| so cancelling or vanishing panels converge;
        // on narrow panels the spacing of representable nodes bounds the
        // attainable accuracy
        let magnitude = abs_sum * h;
        let tol = rel_tol.max(resolution);
        last_change = (refined - estimate).abs();
        estimate = refined;
        if level >= MIN_LEVEL && last_change <= tol * magnitude {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureNotConverged(last_change / (abs_sum * h)))
}

/// Sum of [`tanh_sinh`] over consecutive panels `[bp[i], bp[i+1]]`.
pub fn tanh_sinh_panels<F: FnMut(f64) -> f64>(mut f: F, breakpoints: &[f64], rel_tol: f64) -> Result<f64> {
    breakpoints
        .windows(2)
        .try_fold(0.0, |acc, w| Ok(acc + tanh_sinh(&mut f, w[0], w[1], rel_tol)?))
}

/// Breakpoints `0, L/2^m, …, L/2, L` with the smallest nonzero one below 1.
/// Keeps each panel short relative to the `e^{−θt}` decay scale.
pub fn geometric_breakpoints(upper: f64) -> Vec<f64> {
    let mut bp = Vec::new();
    let mut x = upper;
    while x >= 1.0 {
        bp.push(x);
        x *= 0.5;
    }
    bp.push(x);
    bp.push(0.0);
    bp.reverse();
    bp
}

/// `∫₀^L∫₀^L f(s, t) ds dt`. The square is split on the diagonal so that a
/// kink or algebraic singularity along `s = t` lands on panel endpoints.
/// With `symmetric`, only the lower triangle is integrated and doubled.
pub fn integrate_square<F: FnMut(f64, f64) -> f64>(mut f: F, upper: f64, symmetric: bool, rel_tol: f64) -> Result<f64> {
    let bp = geometric_breakpoints(upper);
    let mut inner_bp: Vec<f64> = Vec::with_capacity(bp.len() + 1);
    let mut err = None;
    let outer = tanh_sinh_panels(
        |t| {
            if err.is_some() {
                return 0.0;
            }
            // s in [0, t]
            inner_bp.clear();
            inner_bp.extend(bp.iter().copied().take_while(|&x| x < t));
            inner_bp.push(t);
            let lower = match tanh_sinh_panels(|s| f(s, t), &inner_bp, rel_tol * 0.1) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return 0.0;
                }
            };
            if symmetric {
                return 2.0 * lower;
            }
            // s in [t, L]
            inner_bp.clear();
            inner_bp.push(t);
            inner_bp.extend(bp.iter().copied().skip_while(|&x| x <= t));
            match tanh_sinh_panels(|s| f(s, t), &inner_bp, rel_tol * 0.1) {
                Ok(v) => lower + v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        },
        &bp,
        rel_tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// Improper integral over `[0, ∞)²` by truncation at `L = 20, 40, 80, …`
/// until two successive truncations differ by less than `change_tol`
/// (relative).
pub fn integrate_quadrant<F: FnMut(f64, f64) -> f64>(mut f: F, symmetric: bool, change_tol: f64) -> Result<f64> {
    let panel_tol = change_tol * 1e-3;
    let mut upper = 20.0;
    let mut previous = integrate_square(&mut f, upper, symmetric, panel_tol)?;
    let mut change = f64::INFINITY;
    for _ in 0..8 {
        upper *= 2.0;
        let current = integrate_square(&mut f, upper, symmetric, panel_tol)?;
        change = (current - previous).abs() / current.abs();
        if change < change_tol {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureNotConverged(change))
}
