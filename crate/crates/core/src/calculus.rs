//! Trapezoidal `dt`-integrals and left-point Riemann–Stieltjes sums on a
//! shared uniform grid.
//!
//! `dt`-integrals run in index order with Neumaier compensation. Stieltjes
//! sums, the integration-by-parts residual and the quadratic covariation are
//! expanded into exact products and summed with [`ExactSum`], so each returns
//! the correctly rounded value of its real-arithmetic definition. Identities
//! that hold in exact arithmetic, such as telescoping of `∫1 dg` or the
//! residual equalling `Σ Δf Δg`, therefore hold bit for bit.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Values `f_0..f_n` of a function on the nodes of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFunction {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GriddedFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Self {
        Self {
            grid,
            values: alloc::vec![c; grid.len()],
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Exact accumulator: keeps the running sum as a list of non-overlapping
/// partials (Shewchuk's expansion arithmetic) and rounds once at the end.
/// Non-finite inputs make the result the plain IEEE sum.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
    special: f64,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        if !x.is_finite() {
            self.special += x;
            return;
        }
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                core::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    /// Adds `a·b` without rounding, using a fused multiply-add for the error.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        if !p.is_finite() {
            self.add(p);
            return;
        }
        let e = libm::fma(a, b, -p);
        self.add(p);
        if e != 0.0 {
            self.add(e);
        }
    }

    /// The exact sum rounded to nearest, ties to even.
    pub fn value(&self) -> f64 {
        if self.special != 0.0 || self.special.is_nan() {
            return self.special;
        }
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        // half-way case: the remaining partials decide the rounding direction
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = 2.0 * lo;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

fn check(f: &GriddedFunction, g: &GriddedFunction) -> Result<()> {
    if f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Trapezoid rule on raw node values with step `dt`.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = CompensatedSum::new();
    acc.add(0.5 * values[0]);
    for &v in &values[1..n - 1] {
        acc.add(v);
    }
    acc.add(0.5 * values[n - 1]);
    acc.value() * dt
}

/// Running trapezoid integrals `∫₀^{t_i} f`, `i = 0..=n`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for w in values.windows(2) {
        acc.add(0.5 * (w[0] + w[1]));
        out.push(acc.value() * dt);
    }
    out
}

/// `∫₀ᵀ f(s) ds` by the trapezoid rule.
pub fn integrate_dt(f: &GriddedFunction) -> f64 {
    trapezoid(&f.values, f.grid.step())
}

/// Adds `±Σ f_i (g_{i+1} − g_i)` to `acc`, each product split exactly.
fn add_left_point(acc: &mut ExactSum, f: &[f64], g: &[f64], sign: f64) {
    for i in 0..f.len().saturating_sub(1) {
        acc.add_product(sign * f[i], g[i + 1]);
        acc.add_product(-sign * f[i], g[i]);
    }
}

/// Left-point sums `Σ f_i (g_{i+1} − g_i)` on raw slices of equal length,
/// correctly rounded.
pub fn left_point_sum(f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    let mut acc = ExactSum::new();
    add_left_point(&mut acc, f, g, 1.0);
    acc.value()
}

/// `∫₀ᵀ f dg` as a left-point Riemann–Stieltjes sum. Meaningful as a Young
/// integral when the Hölder orders of `f` and `g` sum above one.
pub fn integrate_rs(f: &GriddedFunction, g: &GriddedFunction) -> Result<f64> {
    check(f, g)?;
    Ok(left_point_sum(&f.values, &g.values))
}

/// `f_n g_n − f_0 g_0 − ∫g df − ∫f dg` evaluated from its definition.
pub fn ibp_residual(f: &GriddedFunction, g: &GriddedFunction) -> Result<f64> {
    check(f, g)?;
    let (fv, gv) = (&f.values, &g.values);
    let n = fv.len() - 1;
    let mut acc = ExactSum::new();
    acc.add_product(fv[n], gv[n]);
    acc.add_product(-fv[0], gv[0]);
    add_left_point(&mut acc, gv, fv, -1.0);
    add_left_point(&mut acc, fv, gv, -1.0);
    Ok(acc.value())
}

/// Discrete quadratic covariation `Σ Δf_i Δg_i`, algebraically equal to
/// [`ibp_residual`].
pub fn quadratic_covariation(f: &GriddedFunction, g: &GriddedFunction) -> Result<f64> {
    check(f, g)?;
    let mut acc = ExactSum::new();
    for (a, b) in f.values.windows(2).zip(g.values.windows(2)) {
        acc.add_product(a[1], b[1]);
        acc.add_product(-a[1], b[0]);
        acc.add_product(-a[0], b[1]);
        acc.add_product(a[0], b[0]);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn exact_sum_rounds_once() {
        let sum = |xs: &[f64]| {
            let mut acc = ExactSum::new();
            xs.iter().for_each(|&x| acc.add(x));
            acc.value()
        };
        assert_eq!(sum(&[1e100, 1.0, -1e100]), 1.0);
        assert_eq!(sum(&[0.1; 10]), 1.0);
        assert_eq!(sum(&[]), 0.0);
        let ulp = f64::EPSILON;
        // exactly half an ulp plus a sliver rounds up, exactly half stays even
        assert_eq!(sum(&[1.0, ulp / 2.0, ulp * ulp]), 1.0 + ulp);
        assert_eq!(sum(&[1.0, ulp / 2.0]), 1.0);
        assert_eq!(sum(&[1.0, f64::INFINITY]), f64::INFINITY);
        let mut acc = ExactSum::new();
        acc.add_product(1.0 + ulp, 1.0 - ulp);
        acc.add(-1.0);
        assert_eq!(acc.value(), -ulp * ulp);
    }

    #[test]
    fn trapezoid_examples() {
        for n in [1, 3, 10, 1000] {
            let f = GriddedFunction::from_fn(grid(1.0, n), |t| t);
            assert!((integrate_dt(&f) - 0.5).abs() < 1e-15);
        }
        let f = GriddedFunction::from_fn(grid(1.0, 10_000), |t| t * t);
        assert!((integrate_dt(&f) - 1.0 / 3.0).abs() < 1e-8);
        assert_eq!(integrate_dt(&GriddedFunction::constant(grid(2.0, 7), 0.0)), 0.0);
    }

    #[test]
    fn riemann_stieltjes_examples() {
        let g = grid(1.0, 10_000);
        let f = GriddedFunction::from_fn(g, |t| t);
        let h = GriddedFunction::from_fn(g, |t| t * t);
        assert!((integrate_rs(&f, &h).unwrap() - 2.0 / 3.0).abs() < 2e-4);
        let one = GriddedFunction::constant(g, 1.0);
        let v = integrate_rs(&one, &h).unwrap();
        assert_eq!(v, h.terminal() - h.values[0]);
    }

    #[test]
    fn ibp_residual_examples() {
        let g = grid(1.0, 100);
        let f = GriddedFunction::from_fn(g, |t| t);
        let r = ibp_residual(&f, &f).unwrap();
        assert!((r - 0.01).abs() < 1e-15);
        let c = GriddedFunction::constant(g, 3.5);
        let h = GriddedFunction::from_fn(g, |t| (3.0 * t).sin());
        assert_eq!(ibp_residual(&c, &h).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let f = GriddedFunction::constant(grid(1.0, 4), 1.0);
        let g = GriddedFunction::constant(grid(1.0, 5), 1.0);
        assert_eq!(integrate_rs(&f, &g), Err(Error::GridMismatch));
        assert_eq!(ibp_residual(&f, &g), Err(Error::GridMismatch));
        let h = GriddedFunction::constant(grid(2.0, 4), 1.0);
        assert_eq!(integrate_rs(&f, &h), Err(Error::GridMismatch));
        assert!(GriddedFunction::new(grid(1.0, 4), alloc::vec![0.0; 4]).is_err());
    }

    #[test]
    fn first_order_refinement() {
        // ∫₀¹ sin(t) d(t²) = 2(sin 1 − cos 1)
        let exact = 2.0 * (libm::sin(1.0) - libm::cos(1.0));
        let err = |n| {
            let g = grid(1.0, n);
            let f = GriddedFunction::from_fn(g, libm::sin);
            let h = GriddedFunction::from_fn(g, |t| t * t);
            (integrate_rs(&f, &h).unwrap() - exact).abs()
        };
        for n in [64, 128, 256, 512] {
            let ratio = err(n) / err(2 * n);
            assert!((1.8..=2.2).contains(&ratio), "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn cumulative_matches_total() {
        let g = grid(3.0, 50);
        let f = GriddedFunction::from_fn(g, |t| libm::exp(-t) * t);
        let c = cumulative_trapezoid(&f.values, g.step());
        assert_eq!(c[0], 0.0);
        assert!((c[50] - integrate_dt(&f)).abs() < 1e-15);
    }
}
