//! Stochastic unravelling: coloured noise, the non-Markovian Langevin equation,
//! and ensemble correlator estimates.

mod estimate;
mod integrator;
mod noise;

pub use estimate::{estimate_correlators, CorrelatorAccumulator, CorrelatorEstimate};
pub use integrator::{
    memory_kernel, simulate_langevin, LangevinTrajectory, MemoryCutoff, MemoryKernel, MAX_STEP_PHASE,
};
pub use noise::{replica_rng, synthesize_noise, NoisePath, NoiseSynthesizer};

use crate::error::{Error, Result};
use crate::greens::ModeSpec;
use crate::spectral::KernelSet;
use rayon::prelude::*;

/// Ensemble layout and seeding.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub replicas: usize,
    pub master_seed: u64,
    /// Discarded transient; at least `10/γ`.
    pub burn_in: f64,
    /// Length of the stationary window kept per replica.
    pub window: f64,
    /// Samples per periodogram segment.
    pub segment: usize,
    pub max_lag: usize,
    pub initial_q: f64,
    pub initial_p: f64,
    /// Relative error on `⟨q²⟩` above which a statistical-power warning is raised.
    pub target_rel_error: f64,
}

impl EnsembleSpec {
    pub fn new(replicas: usize, master_seed: u64, burn_in: f64, window: f64) -> Self {
        Self {
            replicas,
            master_seed,
            burn_in,
            window,
            segment: 1024,
            max_lag: 64,
            initial_q: 0.0,
            initial_p: 0.0,
            target_rel_error: 0.02,
        }
    }
}

const CHUNK: usize = 16;

/// Runs `spec.replicas` independent replicas and accumulates their stationary windows.
///
/// Replicas are processed in fixed chunks merged in index order, so the result
/// does not depend on the number of worker threads.
pub fn run_ensemble(
    mode: &ModeSpec,
    kernels: &KernelSet,
    memory: &MemoryKernel,
    spec: &EnsembleSpec,
) -> Result<CorrelatorEstimate> {
    if spec.replicas < 2 {
        return Err(Error::domain("langevin.replicas", "need at least two replicas"));
    }
    let gamma = kernels.damping_at(mode.omega)?;
    if !(gamma > 0.0) {
        return Err(Error::Precondition("no damping at the mode frequency: no stationary state".into()));
    }
    if spec.burn_in < 10.0 / gamma * (1.0 - 1e-6) {
        return Err(Error::Precondition(format!(
            "burn-in {} shorter than 10 relaxation times ({})",
            spec.burn_in,
            10.0 / gamma
        )));
    }
    let dt = memory.dt;
    let burn = (spec.burn_in / dt).ceil() as usize;
    let keep = ((spec.window / dt).ceil() as usize).max(spec.segment);
    let total = burn + keep;
    integrator::check_step(mode, memory, dt, total)?;
    let synth = NoiseSynthesizer::new(kernels, dt, total)?;
    let template = CorrelatorAccumulator::new(dt, spec.segment, spec.max_lag)?;

    let chunks = spec.replicas.div_ceil(CHUNK);
    let partial: Vec<Result<CorrelatorAccumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = template.clone();
            let (mut scratch, mut xi, mut q, mut p) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for r in c * CHUNK..((c + 1) * CHUNK).min(spec.replicas) {
                synth.fill(spec.master_seed, r as u64, &mut scratch, &mut xi);
                integrator::simulate_into(mode, memory, dt, &xi, spec.initial_q, spec.initial_p, &mut q, &mut p)?;
                acc.push(&q[burn..])?;
            }
            Ok(acc)
        })
        .collect();
    let mut total_acc = template;
    for part in partial {
        total_acc.merge(&part?);
    }
    total_acc.finish(spec.target_rel_error)
}

/// Stationary position spectrum implied by the kernels, `N / |Ω² - ν² + H(ν)|²`.
pub fn position_spectrum(kernels: &KernelSet, mode: &ModeSpec, nu: f64) -> Result<f64> {
    let h = kernels.h_at(nu)?;
    let re = mode.omega * mode.omega - nu * nu + h.re;
    Ok(kernels.noise_at(nu)? / (re * re + h.im * h.im))
}
