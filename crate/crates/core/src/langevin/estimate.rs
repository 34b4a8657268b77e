use crate::error::{Error, Result};
use crate::io::CsvTable;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Ensemble estimates of `⟨q(t) q(t')⟩` for a stationary process.
#[derive(Debug, Clone)]
pub struct CorrelatorEstimate {
    pub dt: f64,
    pub replicas: usize,
    /// Non-negative frequencies of the spectrum estimate.
    pub frequencies: Vec<f64>,
    /// Hann-windowed, segment-averaged periodogram, normalised as `∫ dτ e^{iντ} C(τ)`.
    pub spectrum: Vec<f64>,
    /// Standard error of `spectrum` across replicas.
    pub spectrum_stderr: Vec<f64>,
    /// `C(τ_l)` for `τ_l = l dt`.
    pub autocovariance: Vec<f64>,
    pub equal_time: f64,
    pub equal_time_stderr: f64,
    pub warnings: Vec<String>,
}

impl CorrelatorEstimate {
    pub fn spectrum_csv(&self) -> String {
        let mut t = CsvTable::new(&["omega", "spectrum", "stderr"]);
        for i in 0..self.frequencies.len() {
            t.row(&[self.frequencies[i], self.spectrum[i], self.spectrum_stderr[i]]);
        }
        t.into_string()
    }

    pub fn autocovariance_csv(&self) -> String {
        let mut t = CsvTable::new(&["tau", "autocovariance"]);
        for (l, c) in self.autocovariance.iter().enumerate() {
            t.row(&[l as f64 * self.dt, *c]);
        }
        t.into_string()
    }
}

/// Streaming accumulator over replicas; merging in a fixed order is deterministic.
#[derive(Clone)]
pub struct CorrelatorAccumulator {
    dt: f64,
    segment: usize,
    max_lag: usize,
    window: Arc<Vec<f64>>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
    replicas: usize,
    spec_sum: Vec<f64>,
    spec_sq: Vec<f64>,
    eq_sum: f64,
    eq_sq: f64,
    acov_sum: Vec<f64>,
    scratch: Vec<Complex64>,
    per_replica: Vec<f64>,
}

impl std::fmt::Debug for CorrelatorAccumulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorrelatorAccumulator")
            .field("segment", &self.segment)
            .field("replicas", &self.replicas)
            .finish()
    }
}

impl CorrelatorAccumulator {
    /// `segment` samples per periodogram (even), autocovariance up to `max_lag`.
    pub fn new(dt: f64, segment: usize, max_lag: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain("dt", "must be positive"));
        }
        if segment < 4 || segment % 2 != 0 {
            return Err(Error::domain("segment", format!("must be even and >= 4, got {segment}")));
        }
        let window: Vec<f64> = (0..segment)
            .map(|j| {
                let s = (PI * j as f64 / segment as f64).sin();
                s * s
            })
            .collect();
        let norm = window.iter().map(|w| w * w).sum::<f64>();
        let bins = segment / 2 + 1;
        Ok(Self {
            dt,
            segment,
            max_lag,
            window: Arc::new(window),
            norm,
            fft: FftPlanner::new().plan_fft_forward(segment),
            replicas: 0,
            spec_sum: vec![0.0; bins],
            spec_sq: vec![0.0; bins],
            eq_sum: 0.0,
            eq_sq: 0.0,
            acov_sum: vec![0.0; max_lag + 1],
            scratch: Vec::with_capacity(segment),
            per_replica: vec![0.0; bins],
        })
    }

    /// Adds one replica's stationary samples (at least one segment long).
    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        let k = self.segment;
        if x.len() < k || x.len() <= self.max_lag {
            return Err(Error::Precondition(format!(
                "sample window of {} is shorter than the segment ({k}) or lag range",
                x.len()
            )));
        }
        let hop = k / 2;
        let starts: Vec<usize> = (0..=(x.len() - k) / hop).map(|s| s * hop).collect();
        self.per_replica.iter_mut().for_each(|v| *v = 0.0);
        let scale = self.dt / self.norm / starts.len() as f64;
        for &s in &starts {
            self.scratch.clear();
            self.scratch
                .extend(x[s..s + k].iter().zip(self.window.iter()).map(|(&v, &w)| Complex64::new(v * w, 0.0)));
            self.fft.process(&mut self.scratch);
            for (acc, z) in self.per_replica.iter_mut().zip(&self.scratch) {
                *acc += z.norm_sqr() * scale;
            }
        }
        for m in 0..self.per_replica.len() {
            self.spec_sum[m] += self.per_replica[m];
            self.spec_sq[m] += self.per_replica[m] * self.per_replica[m];
        }
        let eq = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        self.eq_sum += eq;
        self.eq_sq += eq * eq;
        for l in 0..=self.max_lag {
            let n = x.len() - l;
            let c: f64 = x[..n].iter().zip(&x[l..]).map(|(a, b)| a * b).sum();
            self.acov_sum[l] += c / n as f64;
        }
        self.replicas += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &CorrelatorAccumulator) {
        assert_eq!(self.segment, other.segment);
        for m in 0..self.spec_sum.len() {
            self.spec_sum[m] += other.spec_sum[m];
            self.spec_sq[m] += other.spec_sq[m];
        }
        for l in 0..self.acov_sum.len() {
            self.acov_sum[l] += other.acov_sum[l];
        }
        self.eq_sum += other.eq_sum;
        self.eq_sq += other.eq_sq;
        self.replicas += other.replicas;
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    /// Final estimate; warns when the equal-time relative error exceeds `target_rel_error`.
    pub fn finish(&self, target_rel_error: f64) -> Result<CorrelatorEstimate> {
        let r = self.replicas;
        if r < 2 {
            return Err(Error::Precondition("need at least two replicas for error bars".into()));
        }
        let rf = r as f64;
        let stderr = |sum: f64, sq: f64| {
            let mean = sum / rf;
            ((sq / rf - mean * mean).max(0.0) / (rf - 1.0)).sqrt()
        };
        let bins = self.spec_sum.len();
        let frequencies = (0..bins)
            .map(|m| 2.0 * PI * m as f64 / (self.segment as f64 * self.dt))
            .collect();
        let spectrum = self.spec_sum.iter().map(|s| s / rf).collect();
        let spectrum_stderr = (0..bins).map(|m| stderr(self.spec_sum[m], self.spec_sq[m])).collect();
        let equal_time = self.eq_sum / rf;
        let equal_time_stderr = stderr(self.eq_sum, self.eq_sq);
        let mut warnings = Vec::new();
        if equal_time_stderr > target_rel_error * equal_time.abs() {
            warnings.push(format!(
                "statistical power: equal-time correlator {equal_time:.6e} +- {equal_time_stderr:.3e} \
                 exceeds the requested relative error {target_rel_error:e} with {r} replicas"
            ));
        }
        Ok(CorrelatorEstimate {
            dt: self.dt,
            replicas: r,
            frequencies,
            spectrum,
            spectrum_stderr,
            autocovariance: self.acov_sum.iter().map(|s| s / rf).collect(),
            equal_time,
            equal_time_stderr,
            warnings,
        })
    }
}

/// Estimates correlators from stationary windows of independent replicas.
pub fn estimate_correlators<'a, I>(
    windows: I,
    dt: f64,
    segment: usize,
    max_lag: usize,
    target_rel_error: f64,
) -> Result<CorrelatorEstimate>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = CorrelatorAccumulator::new(dt, segment, max_lag)?;
    for w in windows {
        acc.push(w)?;
    }
    acc.finish(target_rel_error)
}
