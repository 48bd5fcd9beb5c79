//! Circulant-embedding (Davies–Harte) sampler for fBm.
//!
//! fBm has stationary increments, so the autocovariance of fractional
//! Gaussian noise `γ(k) = ½Δ^{2H}(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`
//! embeds into a circulant matrix of size `m = 2n` whose eigenvalues are one
//! FFT away. A path costs `O(n log n)` and needs `O(n)` memory.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlannerScalar};
use vasicek_core::rng::NormalStream;
use vasicek_core::sampler::PathSampler;
use vasicek_core::{Error, Family, KernelSpec, Result, TimeGrid};

/// Eigenvalues above `-EIGEN_TOL · max λ` are rounding noise and are clipped.
pub const EIGEN_TOL: f64 = 1e-10;

pub struct CirculantFactor {
    spec: KernelSpec,
    grid: TimeGrid,
    /// `sqrt(λ_k / m)`.
    amplitude: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantFactor")
            .field("spec", &self.spec)
            .field("grid", &self.grid)
            .finish()
    }
}

fn fgn_autocovariance(h: f64, dt: f64, k: usize) -> f64 {
    let two_h = 2.0 * h;
    let k = k as f64;
    let lower = if k == 0.0 { 1.0 } else { (k - 1.0).powf(two_h) };
    0.5 * dt.powf(two_h) * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + lower)
}

impl CirculantFactor {
    pub fn build(spec: KernelSpec, grid: TimeGrid) -> Result<Self> {
        if spec.family() != Family::Fbm {
            return Err(Error::Domain(format!(
                "circulant embedding needs stationary increments; {spec} has none"
            )));
        }
        let n = grid.intervals();
        if n < 2 {
            return Err(Error::Domain("circulant embedding needs a grid with n >= 2".into()));
        }
        let m = 2 * n;
        let (h, dt) = (spec.hurst(), grid.step());
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocovariance(h, dt, lag), 0.0)
            })
            .collect();
        // The scalar planner picks the same algorithm on every CPU, so paths
        // do not depend on SIMD availability.
        let fft = FftPlannerScalar::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().fold(0.0f64, |a, c| a.max(c.re));
        let mut amplitude = Vec::with_capacity(m);
        for c in &row {
            let lambda = c.re;
            if lambda < -EIGEN_TOL * max {
                return Err(Error::NegativeEigenvalue(lambda));
            }
            amplitude.push((lambda.max(0.0) / m as f64).sqrt());
        }
        Ok(Self {
            spec,
            grid,
            amplitude,
            fft,
        })
    }
}

impl PathSampler for CirculantFactor {
    fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn sample_into(&self, seed: u64, out: &mut [f64]) {
        let n = self.grid.intervals();
        let mut stream = NormalStream::new(seed);
        let mut y: Vec<Complex<f64>> = self
            .amplitude
            .iter()
            .map(|&a| {
                let re = stream.next_normal();
                let im = stream.next_normal();
                Complex::new(a * re, a * im)
            })
            .collect();
        self.fft.process(&mut y);
        out[0] = 0.0;
        let mut acc = 0.0;
        for i in 0..n {
            acc += y[i].re;
            out[i + 1] = acc;
        }
    }
}
