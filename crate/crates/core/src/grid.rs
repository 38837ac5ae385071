//! Uniform readout grids and trapezoid quadrature on them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 2048;

/// Default half width of the grid in units of the probe spread.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;

/// A uniform grid `min, min + dk, ..., max` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    min: f64,
    max: f64,
    n: usize,
}

impl KGrid {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must be finite with min < max (got [{min}, {max}])"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points (got {n})"
            )));
        }
        Ok(Self { min, max, n })
    }

    /// `[center - half_width, center + half_width]` with `n` points.
    pub fn centered(center: f64, half_width: f64, n: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        // Exact endpoints, no accumulated drift.
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Trapezoid weight of point `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let dk = self.spacing();
        if i == 0 || i + 1 == self.n {
            0.5 * dk
        } else {
            dk
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.n);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.weight(i))
            .sum()
    }

    /// Fractional index of `k`, or `None` outside the grid.
    pub fn locate(&self, k: f64) -> Option<(usize, f64)> {
        if !(self.min..=self.max).contains(&k) {
            return None;
        }
        let t = (k - self.min) / self.spacing();
        let i = (t.floor() as usize).min(self.n - 2);
        Some((i, t - i as f64))
    }

    pub fn contains(&self, k: f64) -> bool {
        (self.min..=self.max).contains(&k)
    }
}
