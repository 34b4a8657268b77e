mod common;

use common::*;
use proptest::prelude::*;
use qbm_core::master::{
    asymptotic_coefficients, asymptotic_from_kernels, evolve_gaussian, evolve_wigner_grid, max_gaussian_step,
    max_wigner_step, Axis, CoefficientSchedule, CoefficientSource, GaussianState, MasterCoefficients, WignerGrid,
};
use qbm_core::spectral::{build_kernels, FrequencyShift, KernelOptions};
use qbm_core::{Error, FrequencyGrid};
use std::f64::consts::PI;

const FREE: CoefficientSource<'static> = CoefficientSource::Constant(MasterCoefficients {
    delta_omega2: 0.0,
    gamma: 0.0,
    gamma_h: 0.0,
    gamma_f: 0.0,
});

#[test]
fn free_oscillator_conserves_energy() {
    let omega = 1.7;
    let thermal = GaussianState::thermal(omega, 0.3);
    let start = GaussianState {
        cov_qq: 3.0 * thermal.cov_qq,
        cov_pp: thermal.cov_pp / 3.0,
        ..thermal
    }
    .displaced(0.8, -0.4);
    let dt = max_gaussian_step(omega, 0.0);
    let run = evolve_gaussian(&start, FREE, omega, 100.0 * 2.0 * PI / omega, dt).unwrap();
    let e0 = start.energy(omega);
    for e in run.energies() {
        assert!((e - e0).abs() <= 1e-9 * e0);
    }
    let last = run.last();
    let t = last.t;
    let q = 0.8 * (omega * t).cos() - 0.4 / omega * (omega * t).sin();
    // Fourth-order phase error accumulated over 100 periods.
    assert!((last.state.mean_q - q).abs() < 1e-4);
}

#[test]
fn damped_mean_follows_the_closed_form() {
    let (omega, rate) = (1.0, 0.2);
    let c = asymptotic_coefficients(omega, rate, 0.0).unwrap();
    let gamma = c.gamma;
    let w = (omega * omega - gamma * gamma).sqrt();
    let start = GaussianState::vacuum(omega).displaced(1.0, 0.0);
    let run = evolve_gaussian(&start, CoefficientSource::Constant(c), omega, 30.0, 0.01).unwrap();
    for s in &run.samples {
        let t = s.t;
        let expected = (-gamma * t).exp() * ((w * t).cos() + gamma / w * (w * t).sin());
        assert!((s.state.mean_q - expected).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn relaxation_reaches_the_thermal_state() {
    let (omega, rate, n) = (1.3, 0.5, 0.7);
    let c = asymptotic_coefficients(omega, rate, n).unwrap();
    let start = GaussianState::vacuum(omega).displaced(2.0, 1.0);
    let dt = max_gaussian_step(omega, c.gamma);
    let last = evolve_gaussian(&start, CoefficientSource::Constant(c), omega, 60.0 / rate, dt)
        .unwrap()
        .last()
        .state;
    let target = GaussianState::thermal(omega, n);
    assert!(last.mean_q.abs() < 1e-8 && last.mean_p.abs() < 1e-8);
    assert!((last.cov_qq - target.cov_qq).abs() < 1e-8);
    assert!((last.cov_pp - target.cov_pp).abs() < 1e-8);
    assert!(last.cov_qp.abs() < 1e-8);
}

#[test]
fn finite_time_coefficients_start_at_zero_and_settle() {
    let grid = FrequencyGrid::new(200.0, 1 << 14).unwrap();
    let omega = 1.0;
    let opts = KernelOptions {
        shift: FrequencyShift::AbsorbAt(omega),
        ..Default::default()
    };
    let k = build_kernels(&drude(0.2, 5.0, 1.5), &grid, &opts).unwrap();
    let schedule = CoefficientSchedule::new(&k, omega).unwrap();
    let first = schedule.at(0.0).unwrap();
    assert_eq!((first.gamma, first.gamma_h, first.gamma_f), (0.0, 0.0, 0.0));
    assert!((first.delta_omega2 - k.freq_shift).abs() < 1e-15);

    let late = schedule.at(100.0).unwrap();
    let asym = asymptotic_from_kernels(&k, omega).unwrap();
    assert!((late.gamma - asym.gamma).abs() < 1e-2 * asym.gamma);
    assert!((late.gamma_h - asym.gamma_h).abs() < 1e-2 * asym.gamma_h);
    assert!(late.delta_omega2.abs() < 1e-2 * asym.gamma_h);
    assert!(schedule.at(schedule.span() * 1.01).is_err());
    assert!(CoefficientSource::Schedule(&schedule).envelope(2.0 * schedule.span()).is_err());
}

#[test]
fn unabsorbed_shift_is_rejected() {
    let grid = FrequencyGrid::new(50.0, 1024).unwrap();
    let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &KernelOptions::default()).unwrap();
    assert!(matches!(asymptotic_from_kernels(&k, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn oversized_steps_are_rejected() {
    let start = GaussianState::vacuum(1.0);
    let err = evolve_gaussian(&start, FREE, 1.0, 1.0, 0.1).unwrap_err();
    assert!(matches!(err, Error::Stability { suggested, .. } if (suggested - 0.05).abs() < 1e-15));

    let axis = Axis::symmetric(6.0, 41).unwrap();
    let grid = WignerGrid::gaussian(axis, axis, &start).unwrap();
    let bound = max_wigner_step(&axis, &axis, &MasterCoefficients::default(), 1.0);
    assert!(evolve_wigner_grid(&grid, FREE, 1.0, 1.0, 2.0 * bound, &[], 1).is_err());
}

#[test]
fn sub_heisenberg_states_are_rejected() {
    let bad = GaussianState {
        mean_q: 0.0,
        mean_p: 0.0,
        cov_qq: 0.1,
        cov_qp: 0.0,
        cov_pp: 0.1,
    };
    assert!(bad.validate().is_err());
    assert!(evolve_gaussian(&bad, FREE, 1.0, 1.0, 0.01).is_err());
}

#[test]
fn narrow_phase_space_grid_is_rejected() {
    let c = asymptotic_coefficients(1.0, 0.4, 3.0).unwrap();
    let axis = Axis::symmetric(4.0, 41).unwrap();
    let grid = WignerGrid::gaussian(axis, axis, &GaussianState::vacuum(1.0)).unwrap();
    let dt = max_wigner_step(&axis, &axis, &c, 1.0);
    assert!(matches!(
        evolve_wigner_grid(&grid, CoefficientSource::Constant(c), 1.0, 1.0, dt, &[], 1),
        Err(Error::GridTooSmall(_))
    ));
}

/// Wigner function of the first excited state of a unit-mass oscillator.
fn fock_one(omega: f64, q: f64, p: f64) -> f64 {
    let h = omega * q * q + p * p / omega;
    (2.0 * h - 1.0) * (-h).exp() / PI
}

#[test]
fn negative_wigner_function_keeps_its_mass_and_tracks_the_cumulants() {
    let omega = 1.0;
    let c = asymptotic_coefficients(omega, 0.4, 0.5).unwrap();
    let axis = Axis::symmetric(7.0, 101).unwrap();
    let initial = WignerGrid::from_fn(axis, axis, |q, p| fock_one(omega, q, p));
    assert!(initial.values.iter().any(|&v| v < -0.3));
    assert!((initial.mass() - 1.0).abs() < 1e-10);
    let moments = initial.moments();
    assert!((moments.cov_qq - 1.5).abs() < 1e-10);

    let source = CoefficientSource::Constant(c);
    let dt = 0.99 * max_wigner_step(&axis, &axis, &c, omega);
    let run = evolve_wigner_grid(&initial, source, omega, 5.0, dt, &[2.5], 10).unwrap();
    assert_eq!(run.snapshots.len(), 1);
    let reference = evolve_gaussian(&moments, source, omega, 5.0, 0.01).unwrap().last().state;
    let last = run.history.last().unwrap();
    assert!((last.t - 5.0).abs() < 1e-12);
    for s in &run.history {
        assert!((s.mass - initial.mass()).abs() < 1e-10);
    }
    let got = last.moments;
    for (a, b) in [
        (got.cov_qq, reference.cov_qq),
        (got.cov_pp, reference.cov_pp),
        (got.cov_qp, reference.cov_qp),
    ] {
        assert!((a - b).abs() < 1e-2 * reference.cov_qq, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn thermal_state_is_stationary(
        omega in 0.2f64..5.0,
        rate in 0.0f64..1.0,
        n in 0.0f64..5.0,
    ) {
        let c = asymptotic_coefficients(omega, rate, n).unwrap();
        let start = GaussianState::thermal(omega, n);
        let dt = max_gaussian_step(omega, c.gamma);
        let last = evolve_gaussian(&start, CoefficientSource::Constant(c), omega, 5.0, dt).unwrap().last().state;
        prop_assert!((last.cov_qq - start.cov_qq).abs() <= 1e-12 * start.cov_qq);
        prop_assert!((last.cov_pp - start.cov_pp).abs() <= 1e-12 * start.cov_pp);
    }

    #[test]
    fn free_evolution_preserves_the_uncertainty_product(
        omega in 0.2f64..5.0,
        n in 0.0f64..3.0,
        squeeze in 0.2f64..5.0,
    ) {
        let base = GaussianState::thermal(omega, n);
        let start = GaussianState { cov_qq: base.cov_qq * squeeze, cov_pp: base.cov_pp / squeeze, ..base };
        let dt = max_gaussian_step(omega, 0.0);
        let run = evolve_gaussian(&start, FREE, omega, 20.0 / omega, dt).unwrap();
        let d0 = start.determinant();
        // The product is quadratic in the cumulants, so Runge-Kutta preserves it only to its order.
        for s in &run.samples {
            prop_assert!((s.state.determinant() - d0).abs() <= 1e-4 * d0);
        }
    }
}
