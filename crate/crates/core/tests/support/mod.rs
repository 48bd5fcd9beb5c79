//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use vasicek_core::rng::NormalStream;
use vasicek_core::sampler::PathSampler;
use vasicek_core::{KernelSpec, TimeGrid};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite rule on `[0, upper]`: geometric panels down to `upper·2^{-48}`
/// near the origin, uniform panels of width `width` elsewhere.
pub fn graded_rule(upper: f64, width: f64, order: usize) -> Vec<(f64, f64)> {
    let mut breaks = vec![0.0];
    let mut edge = width * 2f64.powi(-48);
    while edge < width {
        breaks.push(edge);
        edge *= 2.0;
    }
    let mut edge = width;
    while edge < upper - 1e-12 {
        breaks.push(edge);
        edge += width;
    }
    breaks.push(upper);
    let gl = gauss_legendre(order);
    let mut rule = Vec::with_capacity(breaks.len() * order);
    for w in breaks.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        rule.extend(gl.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
    }
    rule
}

/// `∫₀^L ∫₀^L f(s, t) ds dt` by the tensor product of [`graded_rule`].
pub fn quadrant_tensor(f: impl Fn(f64, f64) -> f64, upper: f64, width: f64) -> f64 {
    let rule = graded_rule(upper, width, 16);
    let mut total = 0.0;
    for &(t, wt) in &rule {
        let mut row = 0.0;
        for &(s, ws) in &rule {
            row += ws * f(s, t);
        }
        total += wt * row;
    }
    total
}

/// `∫₀^∞∫₀^∞ f(s, t) ds dt` for symmetric `f`, as `2∫∫ f(s, s+u) ds du`
/// so that a kink on the diagonal lies on the `u = 0` panel edge.
pub fn quadrant_symmetric(f: impl Fn(f64, f64) -> f64, upper: f64, width: f64) -> f64 {
    2.0 * quadrant_tensor(|s, u| f(s, s + u), upper, width)
}

/// `(k_H, l_H, m_H)` from their defining double integrals.
pub fn klm_brute_force(h: f64, theta: f64) -> (f64, f64, f64) {
    let (upper, width) = (60.0 / theta, 0.5 / theta);
    let e = 2.0 * h;
    let k = quadrant_tensor(|s, t| (-theta * (s + t)).exp() * t.powf(e), upper, width);
    let l = quadrant_symmetric(|s, t| (-theta * (s + t)).exp() * (t - s).abs().powf(e), upper, width);
    let m = quadrant_symmetric(|s, t| (-theta * (s + t)).exp() * (s + t).powf(e), upper, width);
    (k, l, m)
}

/// `θ² ∬ e^{−θ(s+t)} E[G_s G_t] ds dt` from the kernel.
pub fn var_zeta_brute_force(spec: &KernelSpec, theta: f64) -> f64 {
    let (upper, width) = (60.0 / theta, 0.5 / theta);
    theta
        * theta
        * quadrant_symmetric(
            |s, t| (-theta * (s + t)).exp() * spec.covariance(s, t).unwrap(),
            upper,
            width,
        )
}

/// Brownian motion from cumulated independent increments; the exact law of
/// fBm with `H = ½` without any covariance factorization.
pub struct BrownianSampler {
    pub spec: KernelSpec,
    pub grid: TimeGrid,
}

impl BrownianSampler {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            spec: KernelSpec::fbm(0.5).unwrap(),
            grid,
        }
    }
}

impl PathSampler for BrownianSampler {
    fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn sample_into(&self, seed: u64, out: &mut [f64]) {
        let sd = self.grid.step().sqrt();
        let mut z = NormalStream::new(seed);
        out[0] = 0.0;
        for i in 1..out.len() {
            out[i] = out[i - 1] + sd * z.next_normal();
        }
    }
}
