//! Uniform frequency grids and their conjugate time grids.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Symmetric uniform grid on `[-omega_max, omega_max]` with an even number of
/// points, so that `omega = 0` is never sampled.
///
/// Sample `k` sits at `(k - (count - 1) / 2) * spacing`; this keeps the grid
/// exactly antisymmetric under `k -> count - 1 - k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    omega_max: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, count: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::domain("omega_max", format!("must be positive and finite, got {omega_max}")));
        }
        if count < 4 || count % 2 != 0 {
            return Err(Error::domain("count", format!("must be even and at least 4, got {count}")));
        }
        Ok(Self { omega_max, count })
    }

    /// Rebuilds a grid from explicit samples, checking that they are uniform and symmetric.
    pub fn from_samples(omega: &[f64]) -> Result<Self> {
        let n = omega.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::domain("omega", format!("need an even number (>= 4) of samples, got {n}")));
        }
        let grid = Self::new(omega[n - 1], n)?;
        let tol = 1e-9 * grid.spacing();
        for (k, &w) in omega.iter().enumerate() {
            if (w - grid.omega(k)).abs() > tol {
                return Err(Error::domain(
                    "omega",
                    format!("sample {k} = {w} is not on the symmetric uniform grid (expected {})", grid.omega(k)),
                ));
            }
        }
        Ok(grid)
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.omega_max / (self.count as f64 - 1.0)
    }

    pub fn omega(&self, k: usize) -> f64 {
        let twice = 2.0 * k as f64 - (self.count as f64 - 1.0);
        twice * (0.5 * self.spacing())
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.omega(k)).collect()
    }

    /// Index of the sample at `-omega(k)`.
    pub fn mirror(&self, k: usize) -> usize {
        self.count - 1 - k
    }

    /// Indices of the strictly positive frequencies.
    pub fn positive(&self) -> std::ops::Range<usize> {
        self.count / 2..self.count
    }

    /// Step of the conjugate time grid, `2 pi / (count * spacing)`.
    pub fn time_step(&self) -> f64 {
        2.0 * PI / (self.count as f64 * self.spacing())
    }

    /// Time of the `i`-th sample of the conjugate grid (ascending, `t = 0` at `count / 2`).
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - (self.count / 2) as f64) * self.time_step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.time(i)).collect()
    }

    /// Index of `t = 0` on the conjugate time grid.
    pub fn zero_time_index(&self) -> usize {
        self.count / 2
    }

    /// Largest positive time sample.
    pub fn time_span(&self) -> f64 {
        self.time(self.count - 1)
    }

    /// Nyquist frequency of the conjugate time grid, half a cell beyond `omega_max`.
    pub fn band_edge(&self) -> f64 {
        PI / self.time_step()
    }

    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        self.count == other.count && (self.omega_max - other.omega_max).abs() <= 1e-12 * self.omega_max
    }

    pub fn ensure_same(&self, other: &FrequencyGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.omega_max, self.count, other.omega_max, other.count
            )))
        }
    }

    pub fn nearest_index(&self, omega: f64) -> usize {
        let x = (omega + self.omega_max) / self.spacing();
        x.round().clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Linear interpolation of grid values at `omega`; errors outside the grid.
    pub fn interpolate(&self, values: &[f64], omega: f64) -> Result<f64> {
        debug_assert_eq!(values.len(), self.count);
        if !(omega.abs() <= self.omega_max * (1.0 + 1e-12)) {
            return Err(Error::Range(format!(
                "omega = {omega} outside grid [-{w}, {w}]",
                w = self.omega_max
            )));
        }
        Ok(self.interpolate_clamped(values, omega))
    }

    /// Linear interpolation that holds the end values beyond the grid.
    pub fn interpolate_clamped(&self, values: &[f64], omega: f64) -> f64 {
        let x = ((omega + self.omega_max) / self.spacing()).clamp(0.0, (self.count - 1) as f64);
        let k = (x.floor() as usize).min(self.count - 2);
        let f = x - k as f64;
        values[k] * (1.0 - f) + values[k + 1] * f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_antisymmetric_and_excludes_zero() {
        let g = FrequencyGrid::new(3.0, 16).unwrap();
        for k in 0..16 {
            assert_eq!(g.omega(k), -g.omega(g.mirror(k)));
            assert_ne!(g.omega(k), 0.0);
        }
        assert!((g.omega(15) - 3.0).abs() < 1e-15);
        assert!((g.omega(1) - g.omega(0) - g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_count() {
        assert!(FrequencyGrid::new(1.0, 15).is_err());
        assert!(FrequencyGrid::new(-1.0, 16).is_err());
    }

    #[test]
    fn from_samples_roundtrip() {
        let g = FrequencyGrid::new(2.5, 64).unwrap();
        assert!(FrequencyGrid::from_samples(&g.samples()).unwrap().same_as(&g));
        let mut bad = g.samples();
        bad[3] += 1e-3;
        assert!(FrequencyGrid::from_samples(&bad).is_err());
    }
}
