use super::noise::NoisePath;
use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::greens::ModeSpec;
use crate::spectral::KernelSet;
use num_complex::Complex64;

/// Rule for cutting the dissipation memory `H(τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemoryCutoff {
    /// Keep lags until `|H(τ)|` stays below this fraction of its maximum.
    Amplitude(f64),
    /// Keep the fewest lags whose discarded tail changes `H(ω)` by at most this
    /// fraction of the damping scale `|Im H(Ω)|` for `|ω| <= min(ω_max / 2, 10 Ω)`.
    Spectral(f64),
    /// Keep exactly this many lags.
    Lags(usize),
}

impl Default for MemoryCutoff {
    /// The band edge makes `H(τ)` ring with a `1/τ` tail, so an amplitude
    /// threshold is usually never reached within the kernel span.
    fn default() -> Self {
        MemoryCutoff::Spectral(1e-2)
    }
}

/// Time-domain memory kernel prepared for the Langevin integrator.
#[derive(Debug, Clone)]
pub struct MemoryKernel {
    pub dt: f64,
    /// `dt · H(τ_j)` for `j = 1..=lags`.
    pub weights: Vec<f64>,
    /// Effective squared frequency: `Ω²` plus the local part of `H`.
    pub omega_eff2: f64,
    /// Bound on `|ΔH(ω)|` caused by the truncation, over the probe band.
    pub spectral_error: f64,
    /// `spectral_error` relative to the damping scale `|Im H(Ω)|`, or to `max |H|` if that vanishes.
    pub relative_error: f64,
    /// True when the kernel had not decayed within the available span.
    pub spans_grid: bool,
    pub cutoff: MemoryCutoff,
}

impl MemoryKernel {
    pub fn lags(&self) -> usize {
        self.weights.len()
    }
}

const PROBES: usize = 256;

pub fn memory_kernel(kernels: &KernelSet, mode: &ModeSpec, cutoff: MemoryCutoff) -> Result<MemoryKernel> {
    mode.validate()?;
    let grid = kernels.grid;
    let dt = grid.time_step();
    let shift = kernels.freq_shift;
    let spec: Vec<Complex64> = (0..grid.count())
        .map(|k| Complex64::new(kernels.h_re[k] - shift, kernels.h_im[k]))
        .collect();
    let peak_h = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let damping = kernels.h_at(mode.omega).map_or(0.0, |h| h.im.abs());
    let scale = if damping > 0.0 { damping } else { peak_h };
    let series = Fourier::new(grid).to_time(&spec);
    let causal: Vec<f64> = series[grid.zero_time_index()..].iter().map(|z| z.re).collect();
    let available = causal.len() - 1;

    // Tail bound E(J) = max_p |Σ_{j>J} dt h_j e^{iω_p t_j}| for every J.
    let probe_max = (0.5 * grid.omega_max()).min(10.0 * mode.omega);
    let mut probes: Vec<f64> = (0..PROBES).map(|i| probe_max * i as f64 / (PROBES - 1) as f64).collect();
    probes.push(mode.omega.min(probe_max));
    let mut tail_bound = vec![0.0f64; causal.len()];
    for &w in &probes {
        let back = Complex64::from_polar(1.0, -w * dt);
        let mut phase = Complex64::from_polar(1.0, w * dt * available as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (1..causal.len()).rev() {
            tail_bound[j] = tail_bound[j].max(acc.norm());
            acc += dt * causal[j] * phase;
            phase *= back;
        }
        tail_bound[0] = tail_bound[0].max(acc.norm());
    }

    let peak = causal[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lags = match cutoff {
        MemoryCutoff::Amplitude(tol) => {
            if !(tol >= 0.0) {
                return Err(Error::domain("memory.tolerance", "must be non-negative"));
            }
            causal[1..]
                .iter()
                .rposition(|v| v.abs() >= tol * peak)
                .map_or(0, |i| i + 1)
        }
        MemoryCutoff::Spectral(tol) => {
            if !(tol >= 0.0) {
                return Err(Error::domain("memory.tolerance", "must be non-negative"));
            }
            (0..=available)
                .find(|&j| tail_bound[j] <= tol * scale)
                .unwrap_or(available)
        }
        MemoryCutoff::Lags(j) => {
            if j > available {
                return Err(Error::Range(format!("{j} memory lags requested, kernel span holds {available}")));
            }
            j
        }
    };
    let spans_grid = lags >= available && tail_bound[available.saturating_sub(1)] > 0.0;
    // The τ = 0 sample acts instantaneously and is folded into the frequency.
    let omega_eff2 = mode.omega * mode.omega + shift + dt * causal[0];
    if !(omega_eff2 > 0.0) {
        return Err(Error::Precondition(format!(
            "effective squared frequency {omega_eff2} is not positive; absorb the frequency shift"
        )));
    }
    let spectral_error = tail_bound[lags];
    Ok(MemoryKernel {
        dt,
        weights: causal[1..=lags].iter().map(|&h| dt * h).collect(),
        omega_eff2,
        spectral_error,
        relative_error: if scale > 0.0 { spectral_error / scale } else { 0.0 },
        spans_grid,
        cutoff,
    })
}

/// Phase-space path of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinTrajectory {
    pub dt: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// Largest admissible `dt · Ω`.
pub const MAX_STEP_PHASE: f64 = 0.1;

/// Integrates `q̈ + Ω² q + ∫_0^t H(t - s) q(s) ds = ξ(t)` over the length of `noise`.
///
/// Splitting: half kick by the memory and noise force, exact rotation at the
/// effective frequency, half kick. The memory sum uses positions strictly in
/// the past, so each step is explicit.
pub fn simulate_langevin(
    mode: &ModeSpec,
    memory: &MemoryKernel,
    noise: &NoisePath,
    q0: f64,
    p0: f64,
) -> Result<LangevinTrajectory> {
    let mut q = Vec::new();
    let mut p = Vec::new();
    simulate_into(mode, memory, noise.dt, &noise.samples, q0, p0, &mut q, &mut p)?;
    Ok(LangevinTrajectory { dt: noise.dt, q, p })
}

/// Validates the step against the kernel and the stability bound.
pub(crate) fn check_step(mode: &ModeSpec, memory: &MemoryKernel, dt: f64, count: usize) -> Result<()> {
    mode.validate()?;
    if (dt - memory.dt).abs() > 1e-12 * memory.dt {
        return Err(Error::GridMismatch(format!(
            "noise step {dt} differs from the kernel time step {}",
            memory.dt
        )));
    }
    let w = mode.omega;
    if dt * w > MAX_STEP_PHASE {
        return Err(Error::Stability {
            dt,
            suggested: MAX_STEP_PHASE / w,
            reason: "Langevin integrator requires dt * Omega <= 0.1".into(),
        });
    }
    if memory.spans_grid && !matches!(memory.cutoff, MemoryCutoff::Lags(_)) && count > memory.lags() + 1 {
        return Err(Error::Range(format!(
            "memory kernel has not decayed within its span of {} steps; trajectory needs {count}",
            memory.lags()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn simulate_into(
    mode: &ModeSpec,
    memory: &MemoryKernel,
    dt: f64,
    xi: &[f64],
    q0: f64,
    p0: f64,
    q: &mut Vec<f64>,
    p: &mut Vec<f64>,
) -> Result<()> {
    let count = xi.len();
    check_step(mode, memory, dt, count)?;
    let w = memory.omega_eff2.sqrt();
    let (s, c) = (w * dt).sin_cos();
    let reversed: Vec<f64> = memory.weights.iter().rev().copied().collect();
    let lags = reversed.len();
    q.clear();
    p.clear();
    q.reserve(count);
    p.reserve(count);
    if count == 0 {
        return Ok(());
    }
    q.push(q0);
    p.push(p0);
    let half = 0.5 * dt;
    let mut force = xi[0];
    let (mut qk, mut pk) = (q0, p0);
    for k in 1..count {
        let ph = pk + half * force;
        let qn = c * qk + (s / w) * ph;
        let pn = -w * s * qk + c * ph;
        q.push(qn);
        let used = lags.min(k);
        let memory_force = dot(&reversed[lags - used..], &q[k - used..k]);
        force = xi[k] - memory_force;
        qk = qn;
        pk = pn + half * force;
        p.push(pk);
    }
    if !(qk.is_finite() && pk.is_finite()) {
        return Err(Error::Stability {
            dt,
            suggested: 0.5 * dt,
            reason: "Langevin trajectory diverged".into(),
        });
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() - a.len() % 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
