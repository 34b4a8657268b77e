mod common;

use common::*;
use qbm_core::greens::ModeSpec;
use qbm_core::langevin::{
    estimate_correlators, memory_kernel, position_spectrum, run_ensemble, simulate_langevin, synthesize_noise,
    EnsembleSpec, MemoryCutoff, NoisePath,
};
use qbm_core::spectral::{build_kernels, Environment, FrequencyShift, KernelOptions, KernelSet, Occupation, SpectralDensity};
use qbm_core::{Error, FrequencyGrid};
use std::f64::consts::PI;

fn absorbed(env: &Environment, grid: FrequencyGrid, omega: f64) -> KernelSet {
    let opts = KernelOptions {
        shift: FrequencyShift::AbsorbAt(omega),
        ..Default::default()
    };
    build_kernels(env, &grid, &opts).unwrap()
}

#[test]
fn free_oscillator_is_exact() {
    let omega = 1.0;
    let grid = FrequencyGrid::new(40.0, 1 << 13).unwrap();
    let env = Environment::new(0.0, SpectralDensity::Ohmic, Occupation::Vacuum);
    let k = build_kernels(&env, &grid, &KernelOptions::default()).unwrap();
    let mode = ModeSpec::new(omega);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::default()).unwrap();
    assert_eq!(memory.lags(), 0);
    let dt = grid.time_step();
    let count = (50.0 * 2.0 * PI / omega / dt).ceil() as usize;
    let path = simulate_langevin(&mode, &memory, &NoisePath::zeros(dt, count), 1.0, 0.0).unwrap();
    for (i, q) in path.q.iter().enumerate() {
        assert!((q - (omega * i as f64 * dt).cos()).abs() < 1e-6);
    }
}

#[test]
fn weak_coupling_envelope_decays_at_half_the_damping_rate() {
    let omega = 1.0;
    let grid = FrequencyGrid::new(32.0, 1 << 14).unwrap();
    let k = absorbed(&drude(0.1, 5.0, 1.0), grid, omega);
    let gamma = k.damping_at(omega).unwrap();
    let expected = 0.5 * 0.1 * 0.1 * 25.0 / 26.0;
    assert!((gamma - expected).abs() < 1e-3 * expected);

    let mode = ModeSpec::new(omega);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::default()).unwrap();
    let dt = grid.time_step();
    let count = (2.0 / gamma / dt) as usize;
    let path = simulate_langevin(&mode, &memory, &NoisePath::zeros(dt, count), 1.0, 0.0).unwrap();
    // Least-squares slope of the log amplitude after the initial slip.
    let w2 = memory.omega_eff2;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in (count / 10)..count {
        let t = i as f64 * dt;
        let a = 0.5 * (path.q[i] * path.q[i] * w2 + path.p[i] * path.p[i]).ln();
        sx += t;
        sy += a;
        sxx += t * t;
        sxy += t * a;
        n += 1.0;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!((-slope - 0.5 * gamma).abs() < 0.03 * 0.5 * gamma, "{} vs {}", -slope, 0.5 * gamma);
}

#[test]
fn noise_is_reproducible_per_replica() {
    let grid = FrequencyGrid::new(32.0, 4096).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let dt = grid.time_step();
    let a = synthesize_noise(&k, dt, 2000, 7, 3).unwrap();
    let b = synthesize_noise(&k, dt, 2000, 7, 3).unwrap();
    let c = synthesize_noise(&k, dt, 2000, 7, 4).unwrap();
    let d = synthesize_noise(&k, dt, 2000, 8, 3).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.samples, c.samples);
    assert_ne!(a.samples, d.samples);
    assert_eq!((a.master_seed, a.replica), (7, 3));
}

#[test]
fn noise_spectrum_matches_the_kernel() {
    let grid = FrequencyGrid::new(32.0, 1 << 14).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let dt = grid.time_step();
    let (segment, replicas) = (1024, 2000);
    let paths: Vec<NoisePath> = (0..replicas)
        .map(|r| synthesize_noise(&k, dt, 8 * segment, 11, r).unwrap())
        .collect();
    let est = estimate_correlators(paths.iter().map(|p| p.samples.as_slice()), dt, segment, 4, 0.05).unwrap();
    let mut checked = 0;
    for (&w, &s) in est.frequencies.iter().zip(&est.spectrum) {
        if !(0.2..=5.0).contains(&w) {
            continue;
        }
        let target = k.noise_at(w).unwrap();
        assert!((s - target).abs() < 0.05 * target, "w={w}: {s} vs {target}");
        checked += 1;
    }
    assert!(checked > 50);

    // Zero mean at a fixed time, to four standard errors.
    let at = 100;
    let mean = paths.iter().map(|p| p.samples[at]).sum::<f64>() / replicas as f64;
    let var = paths.iter().map(|p| p.samples[at] * p.samples[at]).sum::<f64>() / replicas as f64;
    assert!(mean.abs() <= 4.0 * (var / replicas as f64).sqrt());
}

#[test]
fn silent_free_ensemble_has_zero_spectrum() {
    let grid = FrequencyGrid::new(32.0, 4096).unwrap();
    let env = Environment::new(0.0, SpectralDensity::Ohmic, Occupation::Vacuum);
    let k = build_kernels(&env, &grid, &KernelOptions::default()).unwrap();
    let mode = ModeSpec::new(1.0);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::default()).unwrap();
    let dt = grid.time_step();
    let runs: Vec<Vec<f64>> = (0..4)
        .map(|_| simulate_langevin(&mode, &memory, &NoisePath::zeros(dt, 2048), 0.0, 0.0).unwrap().q)
        .collect();
    let est = estimate_correlators(runs.iter().map(Vec::as_slice), dt, 512, 8, 0.05).unwrap();
    assert!(est.spectrum.iter().all(|&s| s == 0.0));
    assert_eq!(est.equal_time, 0.0);
}

#[test]
fn coarse_step_is_refused() {
    let grid = FrequencyGrid::new(10.0, 1024).unwrap();
    let k = build_kernels(&drude(0.1, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let mode = ModeSpec::new(5.0);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::Lags(10)).unwrap();
    let dt = grid.time_step();
    assert!(dt * mode.omega > 0.1);
    let err = simulate_langevin(&mode, &memory, &NoisePath::zeros(dt, 100), 0.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::Stability { suggested, .. } if suggested * mode.omega <= 0.1 + 1e-12));
}

#[test]
fn undecayed_memory_limits_the_trajectory() {
    let grid = FrequencyGrid::new(32.0, 1024).unwrap();
    let k = absorbed(&drude(0.1, 5.0, 1.0), grid, 1.0);
    let mode = ModeSpec::new(1.0);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::Amplitude(0.0)).unwrap();
    assert!(memory.spans_grid);
    let dt = grid.time_step();
    let err = simulate_langevin(&mode, &memory, &NoisePath::zeros(dt, 4 * memory.lags()), 1.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::Range(_)));
    assert!(memory_kernel(&k, &mode, MemoryCutoff::Lags(10 * memory.lags())).is_err());
}

#[test]
fn truncation_error_meets_the_spectral_tolerance() {
    let grid = FrequencyGrid::new(32.0, 1 << 15).unwrap();
    let k = absorbed(&drude(0.2, 20.0, 2.0), grid, 1.0);
    let memory = memory_kernel(&k, &ModeSpec::new(1.0), MemoryCutoff::Spectral(1e-2)).unwrap();
    assert!(memory.relative_error <= 1e-2);
    assert!(memory.lags() > 0 && !memory.spans_grid);
}

#[test]
fn thermal_ensemble_reaches_the_stationary_variance() {
    let omega = 1.0;
    let grid = FrequencyGrid::new(32.0, 1 << 14).unwrap();
    let k = absorbed(&drude(0.3, 5.0, 1.0), grid, omega);
    let mode = ModeSpec::new(omega);
    let gamma = k.damping_at(omega).unwrap();
    let memory = memory_kernel(&k, &mode, MemoryCutoff::default()).unwrap();
    let mut spec = EnsembleSpec::new(400, 20240601, 10.0 / gamma, 200.0);
    spec.segment = 512;
    let est = run_ensemble(&mode, &k, &memory, &spec).unwrap();

    // Frequency integral of the stationary spectrum.
    let dw = grid.spacing();
    let integral: f64 = grid
        .samples()
        .iter()
        .map(|&w| position_spectrum(&k, &mode, w).unwrap())
        .sum::<f64>()
        * dw
        / (2.0 * PI);
    let weak = (0.5 + bose(omega, 1.0)) / omega;
    assert!((est.equal_time - integral).abs() < 0.05 * integral, "{} vs {integral}", est.equal_time);
    assert!((integral - weak).abs() < 0.05 * weak, "{integral} vs {weak}");

    let again = run_ensemble(&mode, &k, &memory, &spec).unwrap();
    assert_eq!(again.spectrum, est.spectrum);
    assert_eq!(again.equal_time, est.equal_time);
}

#[test]
fn ensemble_preconditions() {
    let grid = FrequencyGrid::new(32.0, 4096).unwrap();
    let k = absorbed(&drude(0.3, 5.0, 1.0), grid, 1.0);
    let mode = ModeSpec::new(1.0);
    let memory = memory_kernel(&k, &mode, MemoryCutoff::default()).unwrap();
    let gamma = k.damping_at(1.0).unwrap();
    let short = EnsembleSpec::new(4, 1, 1.0 / gamma, 50.0);
    assert!(matches!(run_ensemble(&mode, &k, &memory, &short), Err(Error::Precondition(_))));
    let lonely = EnsembleSpec::new(1, 1, 10.0 / gamma, 50.0);
    assert!(run_ensemble(&mode, &k, &memory, &lonely).is_err());
}
