//! Exact Gaussian synthesis of driver paths on a uniform grid.
//!
//! The Gram matrix is taken over nodes `t_1..t_n` only: `G_0 = 0` makes the
//! row and column of `t_0` identically zero, so including it would leave the
//! matrix singular. A path is `g = (0, L·z)` with `L Lᵀ` the Gram matrix and
//! `z` drawn from the counter-based stream of the seed.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{domain, Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;
use crate::rng::NormalStream;

/// Diagonal jitter ladder, as multiples of the largest diagonal entry.
pub const JITTER_LADDER: [f64; 3] = [1e-12, 1e-10, 1e-8];

const BLOCK: usize = 16;

/// Anything that turns a seed into a driver path with a fixed law.
pub trait PathSampler: Sync {
    fn spec(&self) -> &KernelSpec;

    fn grid(&self) -> &TimeGrid;

    /// Writes `g_0..g_n` into `out`, which must have length `n + 1`.
    fn sample_into(&self, seed: u64, out: &mut [f64]);

    fn sample(&self, seed: u64) -> GaussianPath {
        let mut values = vec![0.0; self.grid().len()];
        self.sample_into(seed, &mut values);
        GaussianPath {
            grid: *self.grid(),
            spec: *self.spec(),
            values,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    pub grid: TimeGrid,
    pub spec: KernelSpec,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl GaussianPath {
    /// The path identically zero; a test hook for degenerate inputs.
    pub fn zero(grid: TimeGrid, spec: KernelSpec) -> Self {
        Self {
            grid,
            spec,
            values: vec![0.0; grid.len()],
            seed: 0,
        }
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths have at least two nodes")
    }
}

/// Lower-triangular factor of the Gram matrix over `t_1..t_n`, stored packed
/// by rows (row `i` occupies `i(i+1)/2 .. i(i+1)/2 + i + 1`).
#[derive(Debug, Clone)]
pub struct PathFactor {
    grid: TimeGrid,
    spec: KernelSpec,
    dim: usize,
    lower: Vec<f64>,
    jitter_used: f64,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Fixed-order dot product; eight lanes so the compiler can vectorize it
/// while the summation order stays independent of the target.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Packed Gram matrix `[cov(t_i, t_j)]` over nodes `t_1..t_n`.
pub fn gram_packed(spec: &KernelSpec, grid: &TimeGrid) -> Vec<f64> {
    let n = grid.intervals();
    let mut gram = Vec::with_capacity(row_start(n));
    for i in 0..n {
        let ti = grid.node(i + 1);
        for j in 0..=i {
            gram.push(spec.covariance_unchecked(grid.node(j + 1), ti));
        }
    }
    gram
}

/// In-place Cholesky of a packed matrix; returns the failing pivot on error.
/// Rows are processed in blocks so each earlier row is streamed once per
/// block; the floating-point operation order per entry is that of the plain
/// row-by-row algorithm.
fn cholesky_packed(a: &mut [f64], n: usize) -> core::result::Result<(), (usize, f64)> {
    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + BLOCK).min(n);
        let (done, block) = a.split_at_mut(row_start(i0));
        for j in 0..i0 {
            let lj = &done[row_start(j)..row_start(j) + j + 1];
            let ljj = lj[j];
            for i in i0..i1 {
                let off = row_start(i) - row_start(i0);
                let li = &mut block[off..off + i + 1];
                li[j] = (li[j] - dot(&li[..j], &lj[..j])) / ljj;
            }
        }
        for i in i0..i1 {
            let off_i = row_start(i) - row_start(i0);
            for j in i0..i {
                let off_j = row_start(j) - row_start(i0);
                let (head, tail) = block.split_at_mut(off_i);
                let lj = &head[off_j..off_j + j + 1];
                let li = &mut tail[..i + 1];
                li[j] = (li[j] - dot(&li[..j], &lj[..j])) / lj[j];
            }
            let li = &mut block[off_i..off_i + i + 1];
            let d = li[i] - dot(&li[..i], &li[..i]);
            if !(d > 0.0) {
                return Err((i, d));
            }
            li[i] = sqrt(d);
        }
        i0 = i1;
    }
    Ok(())
}

impl PathFactor {
    /// Factorizes the Gram matrix of `spec` on `grid`, retrying with the
    /// diagonal jitter ladder when the plain factorization hits a
    /// non-positive pivot.
    pub fn build(spec: KernelSpec, grid: TimeGrid) -> Result<Self> {
        let n = grid.intervals();
        if n < 2 {
            return Err(domain("factorization needs a grid with n >= 2"));
        }
        let gram = gram_packed(&spec, &grid);
        let max_diag = (0..n).map(|i| gram[row_start(i) + i]).fold(0.0f64, f64::max);
        let mut work = gram.clone();
        let mut last = match cholesky_packed(&mut work, n) {
            Ok(()) => {
                return Ok(Self {
                    grid,
                    spec,
                    dim: n,
                    lower: work,
                    jitter_used: 0.0,
                })
            }
            Err(e) => e,
        };
        for &rel in &JITTER_LADDER {
            let jitter = rel * max_diag;
            work.copy_from_slice(&gram);
            for i in 0..n {
                work[row_start(i) + i] += jitter;
            }
            match cholesky_packed(&mut work, n) {
                Ok(()) => {
                    return Ok(Self {
                        grid,
                        spec,
                        dim: n,
                        lower: work,
                        jitter_used: jitter,
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(Error::FactorizationFailed {
            jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * max_diag,
            pivot: last.0,
            value: last.1,
        })
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row `i` of `L` (entries `0..=i`).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.lower[row_start(i)..row_start(i) + i + 1]
    }

    /// `L[i][j]`, zero above the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[row_start(i) + j]
        }
    }

    /// `g_{i+1} = Σ_{j≤i} L_ij z_j` for a given innovation vector.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim + 1);
        out[0] = 0.0;
        for i in 0..self.dim {
            out[i + 1] = dot(self.row(i), &z[..=i]);
        }
    }
}

impl PathSampler for PathFactor {
    fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn sample_into(&self, seed: u64, out: &mut [f64]) {
        let mut z = vec![0.0; self.dim];
        NormalStream::new(seed).fill(&mut z);
        self.apply(&z, out);
    }
}

/// Unbiased sample covariance of `g_i` and `g_j` across paths.
pub fn empirical_covariance(paths: &[GaussianPath], i: usize, j: usize) -> Result<f64> {
    if paths.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: paths.len(),
        });
    }
    let m = paths.len() as f64;
    let (mut si, mut sj) = (0.0, 0.0);
    for p in paths {
        si += p.values[i];
        sj += p.values[j];
    }
    let (mi, mj) = (si / m, sj / m);
    let cross: f64 = paths.iter().map(|p| (p.values[i] - mi) * (p.values[j] - mj)).sum();
    Ok(cross / (m - 1.0))
}
