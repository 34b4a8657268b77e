mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qbm_core::greens::{
    build_propagators, causality_violation, to_frequency_domain, to_time_domain, ModeSpec, Regulator,
};
use qbm_core::spectral::{build_kernels, Environment, KernelOptions, Occupation, SpectralDensity};
use qbm_core::FrequencyGrid;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn free_oscillator_retarded_propagator_in_time() {
    let (omega, eps) = (1.3, 0.1);
    let grid = FrequencyGrid::new(100.0, 1 << 14).unwrap();
    let env = Environment::new(0.0, SpectralDensity::Ohmic, Occupation::Vacuum);
    let k = build_kernels(&env, &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(omega), &k, Regulator::Fixed(eps)).unwrap();
    assert_eq!(set.regulator, eps);
    let series = to_time_domain(&grid, &set.retarded).unwrap();
    let damped = (omega * omega - 0.25 * eps * eps).sqrt();
    // Band truncation of the 1/ω² tail.
    let tol = 2.0 / (std::f64::consts::PI * grid.omega_max());
    for (t, g) in series.times().iter().zip(&series.values) {
        if t.abs() > 60.0 || t.abs() < 0.1 {
            continue;
        }
        let expected = if *t > 0.0 {
            Complex64::new(0.0, -(-0.5 * eps * t).exp() * (damped * t).sin() / damped)
        } else {
            Complex64::new(0.0, 0.0)
        };
        assert!(close(*g, expected, tol), "t={t}: {g} vs {expected}");
    }
}

#[test]
fn time_domain_round_trip_is_exact() {
    let grid = FrequencyGrid::new(40.0, 2048).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(1.0), &k, Regulator::Off).unwrap();
    let back = to_frequency_domain(&to_time_domain(&grid, &set.retarded).unwrap());
    let peak = set.retarded.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    for (a, b) in back.iter().zip(&set.retarded) {
        assert!(close(*a, *b, 1e-12 * peak));
    }
}

#[test]
fn drude_retarded_propagator_is_causal() {
    let grid = FrequencyGrid::new(400.0, 1 << 18).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(1.0), &k, Regulator::Auto).unwrap();
    assert_eq!(set.regulator, 0.0);
    assert!(causality_violation(&set).unwrap() < 1e-3);
}

#[test]
fn propagator_identities_hold_pointwise() {
    let grid = FrequencyGrid::new(50.0, 4096).unwrap();
    let k = build_kernels(&drude(0.4, 6.0, 0.8), &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(1.2), &k, Regulator::Off).unwrap();
    for i in 0..grid.count() {
        let scale = set.hadamard[i].norm().max(set.retarded[i].norm());
        let tol = 1e-12 * scale;
        assert!(close(set.advanced[i], set.retarded[i].conj(), tol));
        assert!(close(set.pauli_jordan[i], set.retarded[i] + set.advanced[i], tol));
        assert!(close(set.hadamard[i], set.wightman_plus[i] + set.wightman_minus[i], tol));
        assert!(close(set.pauli_jordan[i], set.wightman_plus[i] - set.wightman_minus[i], tol));
        assert!(close(set.feynman[i] + set.dyson[i], set.hadamard[i], tol));
        assert!(close(set.feynman[i] - set.dyson[i], set.retarded[i] - set.advanced[i], tol));
        assert!(set.wightman_plus[i].re >= 0.0 && set.wightman_minus[i].re >= 0.0);
    }
}

#[test]
fn commutator_sum_rule() {
    // ∫ dω/2π ω ρ(ω) = 1 for ρ = G_+ - G_-, from [q, p] = i.
    let grid = FrequencyGrid::new(400.0, 1 << 17).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(1.0), &k, Regulator::Off).unwrap();
    let total: f64 = (0..grid.count())
        .map(|i| grid.omega(i) * set.pauli_jordan[i].re)
        .sum::<f64>()
        * grid.spacing()
        / (2.0 * std::f64::consts::PI);
    assert!((total - 1.0).abs() < 1e-2, "{total}");
}

#[test]
fn transparent_pole_gets_the_automatic_regulator() {
    let grid = FrequencyGrid::new(20.0, 2048).unwrap();
    // A Drude bath with a tiny cutoff is transparent at Ω = 5.
    let k = build_kernels(&drude_vacuum(0.05, 0.01), &grid, &KernelOptions::default()).unwrap();
    let set = build_propagators(&ModeSpec::new(5.0), &k, Regulator::Auto).unwrap();
    assert_eq!(set.regulator, 10.0 * grid.spacing());
    let off = build_propagators(&ModeSpec::new(5.0), &k, Regulator::Off).unwrap();
    assert_eq!(off.regulator, 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let grid = FrequencyGrid::new(20.0, 256).unwrap();
    let k = build_kernels(&drude(0.2, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    assert!(build_propagators(&ModeSpec::new(1.0), &k, Regulator::Fixed(-1.0)).is_err());
    assert!(build_propagators(&ModeSpec::new(-1.0), &k, Regulator::Off).is_err());
    assert!(to_time_domain(&grid, &[Complex64::new(0.0, 0.0); 3]).is_err());
}

#[test]
fn field_mode_dispersion() {
    let mode = ModeSpec::field(0.6, 0.8);
    assert!((mode.omega - 1.0).abs() < 1e-15);
    assert!((mode.bare_dispersion() - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wightman_functions_obey_kms(
        g in 0.05f64..0.8,
        cutoff in 1.0f64..10.0,
        temperature in 0.2f64..5.0,
        omega in 0.3f64..3.0,
    ) {
        let grid = FrequencyGrid::new(30.0, 1024).unwrap();
        let k = build_kernels(&drude(g, cutoff, temperature), &grid, &KernelOptions::default()).unwrap();
        let set = build_propagators(&ModeSpec::new(omega), &k, Regulator::Off).unwrap();
        for i in 0..grid.count() {
            let w = grid.omega(i);
            if w.abs() > 10.0 * temperature {
                continue;
            }
            let ratio = set.wightman_plus[i].re / set.wightman_minus[i].re;
            prop_assert!((ratio / (w / temperature).exp() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_weight_is_positive(
        g in 0.05f64..0.8,
        omega in 0.3f64..3.0,
    ) {
        let grid = FrequencyGrid::new(30.0, 512).unwrap();
        let k = build_kernels(&drude_vacuum(g, 5.0), &grid, &KernelOptions::default()).unwrap();
        let set = build_propagators(&ModeSpec::new(omega), &k, Regulator::Off).unwrap();
        for i in 0..grid.count() {
            // ω ρ(ω) >= 0 for a stable mode.
            prop_assert!(grid.omega(i) * set.pauli_jordan[i].re >= 0.0);
        }
    }
}
