//! Sample statistics: Kolmogorov–Smirnov distances, quantiles, rank
//! correlation and moments. Infinite values are ordinary order statistics.

use alloc::vec::Vec;

use crate::calculus::compensated_sum;
use crate::error::{Error, Result};

/// Minimum sample size for a KS statistic.
pub const KS_MIN_SAMPLES: usize = 10;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup_x |F_n(x) − F(x)|` against a continuous reference CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: KS_MIN_SAMPLES,
            got: sample.len(),
        });
    }
    let xs = sorted(sample);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// `sup_x |F_n(x) − G_m(x)|` between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: KS_MIN_SAMPLES,
                got: s.len(),
            });
        }
    }
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = if xa[i].total_cmp(&xb[j]).is_le() { xa[i] } else { xb[j] };
        while i < xa.len() && xa[i].total_cmp(&x).is_eq() {
            i += 1;
        }
        while j < xb.len() && xb[j].total_cmp(&x).is_eq() {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Linear-interpolation quantile of sorted data (Hyndman–Fan type 7).
pub fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    assert!(!xs.is_empty());
    let h = (xs.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        xs[lo]
    } else {
        xs[lo] + frac * (xs[hi] - xs[lo])
    }
}

pub fn quantile(xs: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(xs), p)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn iqr(xs: &[f64]) -> f64 {
    let s = sorted(xs);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

/// Ranks `1..=n`, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]].total_cmp(&xs[idx[i]]).is_eq() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = compensated_sum(a.iter().copied()) / n;
    let mb = compensated_sum(b.iter().copied()) / n;
    let sab = compensated_sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let saa = compensated_sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let sbb = compensated_sum(b.iter().map(|y| (y - mb) * (y - mb)));
    sab / libm::sqrt(saa * sbb)
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Domain(alloc::format!(
            "length mismatch {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: a.len(),
        });
    }
    Ok(pearson(&ranks(a), &ranks(b)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let c = |k: i32| compensated_sum(xs.iter().map(|x| libm::pow(x - mean, k as f64))) / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    Moments {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: m3 / libm::pow(m2, 1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}
