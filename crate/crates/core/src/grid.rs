use alloc::format;

use crate::error::{domain, Result};

/// Uniform partition `t_i = i·T/n`, `i = 0..=n`, of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    intervals: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive and finite, got {horizon}")));
        }
        if intervals == 0 {
            return Err(domain("grid needs at least one interval"));
        }
        Ok(Self { horizon, intervals })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    /// `t_i`, with `t_n = T` exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.intervals);
        if i == self.intervals {
            self.horizon
        } else {
            i as f64 * self.horizon / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(move |i| self.node(i))
    }
}
