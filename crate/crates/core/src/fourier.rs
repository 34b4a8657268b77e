//! Discrete Fourier pair between a [`FrequencyGrid`] and its conjugate time grid.
//!
//! Convention: `G(t) = ∫ dω/2π e^{-iωt} G(ω)`, discretised as
//! `G(t_j) = Δω/2π Σ_k e^{-iω_k t_j} G(ω_k)` and inverted exactly by
//! `G(ω_k) = Δt Σ_j e^{iω_k t_j} G(t_j)`.

use crate::grid::FrequencyGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Cached FFT plans and phase factors for one grid.
#[derive(Clone)]
pub struct Fourier {
    grid: FrequencyGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{iπ j (n-1)/n} indexed by time sample i = j + n/2
    phase: Vec<Complex64>,
}

impl Fourier {
    pub fn new(grid: FrequencyGrid) -> Self {
        let n = grid.count();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let half = (n / 2) as i64;
        let phase = (0..n as i64)
            .map(|i| {
                let j = i - half;
                // (-1)^j e^{-iπ j / n}
                let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                Complex64::from_polar(sign, -PI * j as f64 / n as f64)
            })
            .collect();
        Self {
            grid,
            forward,
            inverse,
            phase,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Frequency samples to time samples (ascending time order).
    pub fn to_time(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.count();
        assert_eq!(spectrum.len(), n, "spectrum length does not match grid");
        let mut buf = spectrum.to_vec();
        self.forward.process(&mut buf);
        let scale = self.grid.spacing() / (2.0 * PI);
        let half = n / 2;
        (0..n)
            .map(|i| {
                let idx = (i + half) % n;
                buf[idx] * self.phase[i] * scale
            })
            .collect()
    }

    /// Time samples (ascending time order) back to frequency samples.
    pub fn to_frequency(&self, series: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.count();
        assert_eq!(series.len(), n, "series length does not match grid");
        let half = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            buf[(i + half) % n] = series[i] * self.phase[i].conj();
        }
        self.inverse.process(&mut buf);
        let dt = self.grid.time_step();
        buf.iter_mut().for_each(|z| *z *= dt);
        buf
    }

    pub fn real_to_time(&self, spectrum: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = spectrum.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.to_time(&c)
    }
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_spectrum_maps_to_zero_time_spike() {
        let g = FrequencyGrid::new(4.0, 32).unwrap();
        let f = Fourier::new(g);
        let t = f.real_to_time(&vec![1.0; 32]);
        let z = g.zero_time_index();
        let expect = 32.0 * g.spacing() / (2.0 * PI);
        assert!((t[z].re - expect).abs() < 1e-13);
        for (i, v) in t.iter().enumerate() {
            if i != z {
                assert!(v.norm() < 1e-13, "leak at {i}: {v}");
            }
        }
    }

    #[test]
    fn matches_direct_sum() {
        let g = FrequencyGrid::new(2.0, 16).unwrap();
        let f = Fourier::new(g);
        let spec: Vec<Complex64> = (0..16).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let t = f.to_time(&spec);
        for i in 0..16 {
            let ti = g.time(i);
            let direct: Complex64 = (0..16)
                .map(|k| spec[k] * Complex64::from_polar(1.0, -g.omega(k) * ti))
                .sum::<Complex64>()
                * (g.spacing() / (2.0 * PI));
            assert!((t[i] - direct).norm() < 1e-13);
        }
    }
}
