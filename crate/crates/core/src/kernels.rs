//! Covariance functions of the three driver families.
//!
//! | family | `E[G_s G_t]` | `γ = η` |
//! |--------|--------------|---------|
//! | fBm    | `½(t^{2H} + s^{2H} − |t−s|^{2H})` | `H` |
//! | sub-fBm | `t^{2H} + s^{2H} − ½((t+s)^{2H} + |t−s|^{2H})` | `H` |
//! | bi-fBm | `2^{−K}((t^{2H} + s^{2H})^K − |t−s|^{2HK})` | `HK` |
//!
//! Every kernel-dependent constant downstream is derived from a [`KernelSpec`].

use alloc::format;
use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use libm::pow;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Fbm,
    SubFbm,
    BiFbm,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Fbm => "fbm",
            Family::SubFbm => "subfbm",
            Family::BiFbm => "bifbm",
        }
    }
}

/// A driver covariance model. `k` is stored as `1.0` for fBm and sub-fBm so
/// that `γ = H·K` holds for every family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: Family,
    h: f64,
    k: f64,
}

impl KernelSpec {
    pub fn fbm(h: f64) -> Result<Self> {
        Self::new(Family::Fbm, h, 1.0)
    }

    pub fn subfbm(h: f64) -> Result<Self> {
        Self::new(Family::SubFbm, h, 1.0)
    }

    pub fn bifbm(h: f64, k: f64) -> Result<Self> {
        Self::new(Family::BiFbm, h, k)
    }

    pub fn new(family: Family, h: f64, k: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(domain(format!("H must lie in (0,1), got {h}")));
        }
        if !(k > 0.0 && k <= 1.0) {
            return Err(domain(format!("K must lie in (0,1], got {k}")));
        }
        if family != Family::BiFbm && k != 1.0 {
            return Err(domain(format!("K is only a parameter of bifbm, got K={k}")));
        }
        Ok(Self { family, h, k })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn hurst(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Hölder exponent of the increments.
    pub fn gamma(&self) -> f64 {
        self.h * self.k
    }

    /// Growth exponent: `E[G_T²] / T^{2η}` converges.
    pub fn eta(&self) -> f64 {
        self.gamma()
    }

    /// Constant `c` in `E[(G_t − G_s)²] ≤ c |t−s|^{2γ}`. For subfBm the
    /// increment variance lies between `(2 − 2^{2H−1})|t−s|^{2H}` and
    /// `|t−s|^{2H}`, in either order depending on the side of ½.
    pub fn increment_constant(&self) -> f64 {
        match self.family {
            Family::Fbm => 1.0,
            Family::SubFbm => (2.0 - pow(2.0, 2.0 * self.h - 1.0)).max(1.0),
            Family::BiFbm => pow(2.0, 1.0 - self.k),
        }
    }

    /// `E[G_s G_t]`.
    pub fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        if !(s >= 0.0 && t >= 0.0) {
            return Err(domain(format!("times must be nonnegative, got s={s}, t={t}")));
        }
        Ok(self.covariance_unchecked(s, t))
    }

    /// [`covariance`](Self::covariance) without the sign check, for callers
    /// that own a validated grid.
    pub fn covariance_unchecked(&self, s: f64, t: f64) -> f64 {
        if s == 0.0 || t == 0.0 {
            return 0.0;
        }
        let two_h = 2.0 * self.h;
        let lag = if s > t { s - t } else { t - s };
        match self.family {
            Family::Fbm => 0.5 * (pow(t, two_h) + pow(s, two_h) - pow(lag, two_h)),
            Family::SubFbm => pow(t, two_h) + pow(s, two_h) - 0.5 * (pow(s + t, two_h) + pow(lag, two_h)),
            Family::BiFbm => {
                let k = self.k;
                (pow(pow(t, two_h) + pow(s, two_h), k) - pow(lag, two_h * k)) / pow(2.0, k)
            }
        }
    }

    /// `E[(G_t − G_s)²]`, assembled from the covariance so that it agrees with
    /// any Gram matrix built from [`covariance`](Self::covariance).
    pub fn increment_variance(&self, s: f64, t: f64) -> Result<f64> {
        let v = self.covariance(t, t)? + self.covariance(s, s)? - 2.0 * self.covariance(s, t)?;
        Ok(v.max(0.0))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::BiFbm => write!(f, "bifbm:H={},K={}", self.h, self.k),
            fam => write!(f, "{}:H={}", fam.token(), self.h),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `fbm:H=0.7`, `subfbm:H=0.3` or `bifbm:H=0.6,K=0.8`.
    fn from_str(token: &str) -> Result<Self> {
        let bad = || Error::KernelToken(token.to_string());
        let (name, params) = token.split_once(':').ok_or_else(bad)?;
        let family = match name.trim() {
            "fbm" => Family::Fbm,
            "subfbm" => Family::SubFbm,
            "bifbm" => Family::BiFbm,
            _ => return Err(bad()),
        };
        let mut h = None;
        let mut k = None;
        for part in params.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: f64 = value.trim().parse().map_err(|_| bad())?;
            let slot = match key.trim() {
                "H" => &mut h,
                "K" if family == Family::BiFbm => &mut k,
                _ => return Err(bad()),
            };
            if slot.replace(value).is_some() {
                return Err(bad());
            }
        }
        let h = h.ok_or_else(bad)?;
        let k = match family {
            Family::BiFbm => k.ok_or_else(bad)?,
            _ => 1.0,
        };
        Self::new(family, h, k)
    }
}
