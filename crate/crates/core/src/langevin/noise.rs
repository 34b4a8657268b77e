use crate::error::{Error, Result};
use crate::spectral::KernelSet;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// One realisation of the stationary Gaussian noise `ξ(t)` with `⟨ξξ⟩ ↔ N(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub master_seed: u64,
    pub replica: u64,
}

impl NoisePath {
    /// Noise-free path, for deterministic runs.
    pub fn zeros(dt: f64, count: usize) -> Self {
        Self {
            dt,
            samples: vec![0.0; count],
            master_seed: 0,
            replica: 0,
        }
    }
}

/// Per-replica random stream: ChaCha8 keyed by the master seed, one stream per replica.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Spectral synthesis of noise paths of fixed length and step.
///
/// Complex white noise is coloured by `sqrt(N(ν))` on a periodic embedding at
/// least twice the path length and transformed once; the real part has the
/// target covariance at all lags shorter than the path.
#[derive(Clone)]
pub struct NoiseSynthesizer {
    dt: f64,
    count: usize,
    amplitude: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NoiseSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseSynthesizer")
            .field("dt", &self.dt)
            .field("count", &self.count)
            .field("embedding", &self.amplitude.len())
            .finish()
    }
}

impl NoiseSynthesizer {
    pub fn new(kernels: &KernelSet, dt: f64, count: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain("dt", format!("must be positive, got {dt}")));
        }
        if count == 0 {
            return Err(Error::domain("count", "noise path must have at least one sample"));
        }
        let grid = kernels.grid;
        let nyquist = PI / dt;
        if nyquist > grid.band_edge() * (1.0 + 1e-9) {
            return Err(Error::Range(format!(
                "noise Nyquist frequency {nyquist} exceeds the kernel band edge {}",
                grid.band_edge()
            )));
        }
        let negative: Vec<f64> = (0..grid.count())
            .filter(|&k| kernels.noise[k] < 0.0)
            .map(|k| grid.omega(k))
            .collect();
        if !negative.is_empty() {
            return Err(Error::Physicality {
                what: "negative noise kernel".into(),
                frequencies: negative,
            });
        }
        let m = (2 * count).next_power_of_two();
        let amplitude = (0..m)
            .map(|i| {
                let signed = if i < m / 2 { i as f64 } else { i as f64 - m as f64 };
                let nu = 2.0 * PI * signed / (m as f64 * dt);
                let s = grid.interpolate_clamped(&kernels.noise, nu).max(0.0);
                (2.0 * s / (m as f64 * dt)).sqrt()
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(m);
        Ok(Self {
            dt,
            count,
            amplitude,
            fft,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Writes the path of `replica` into `out`, using `scratch` as FFT workspace.
    pub fn fill(&self, master_seed: u64, replica: u64, scratch: &mut Vec<Complex64>, out: &mut Vec<f64>) {
        let mut rng = replica_rng(master_seed, replica);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        scratch.clear();
        scratch.extend(self.amplitude.iter().map(|&a| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * r * a, im * r * a)
        }));
        self.fft.process(scratch);
        out.clear();
        out.extend(scratch[..self.count].iter().map(|z| z.re));
    }

    pub fn generate(&self, master_seed: u64, replica: u64) -> NoisePath {
        let mut scratch = Vec::new();
        let mut samples = Vec::new();
        self.fill(master_seed, replica, &mut scratch, &mut samples);
        NoisePath {
            dt: self.dt,
            samples,
            master_seed,
            replica,
        }
    }
}

/// Draws the noise path of one replica.
pub fn synthesize_noise(kernels: &KernelSet, dt: f64, count: usize, master_seed: u64, replica: u64) -> Result<NoisePath> {
    Ok(NoiseSynthesizer::new(kernels, dt, count)?.generate(master_seed, replica))
}
