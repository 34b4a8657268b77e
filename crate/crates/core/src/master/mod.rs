//! Reduced dynamics of a mode: master-equation coefficients, Gaussian
//! cumulants and the phase-space (Wigner) representation.

mod wigner;

pub use wigner::{evolve_wigner_grid, max_wigner_step, Axis, WignerGrid, WignerRun, WignerSample, MAX_STEP_OUTFLOW};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::io::CsvTable;
use crate::spectral::KernelSet;
use num_complex::Complex64;

/// Coefficients of the Gaussian master equation at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MasterCoefficients {
    /// Frequency renormalisation `δΩ²`.
    pub delta_omega2: f64,
    /// Momentum damping `Γ` (the amplitude decays as `e^{-Γt}`).
    pub gamma: f64,
    /// Normal diffusion `Γ_h`.
    pub gamma_h: f64,
    /// Anomalous diffusion `Γ_f`.
    pub gamma_f: f64,
}

/// Late-time coefficients of a weakly damped mode with `Re H(Ω)` absorbed.
pub fn asymptotic_coefficients(omega: f64, damping_rate: f64, occupation: f64) -> Result<MasterCoefficients> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain("omega", format!("must be positive, got {omega}")));
    }
    if !(damping_rate.is_finite() && damping_rate >= 0.0) {
        return Err(Error::domain("gamma", format!("must be non-negative, got {damping_rate}")));
    }
    if !(occupation.is_finite() && occupation >= 0.0) {
        return Err(Error::domain("occupation", format!("must be non-negative, got {occupation}")));
    }
    Ok(MasterCoefficients {
        delta_omega2: 0.0,
        gamma: 0.5 * damping_rate,
        gamma_h: omega * damping_rate * (0.5 + occupation),
        gamma_f: 0.0,
    })
}

/// Late-time coefficients read off the kernels at `omega`.
///
/// Requires the frequency shift to be absorbed so that `Re H(Ω)` vanishes.
pub fn asymptotic_from_kernels(kernels: &KernelSet, omega: f64) -> Result<MasterCoefficients> {
    let h = kernels.h_at(omega)?;
    let scale = kernels.h_re.iter().chain(&kernels.h_im).fold(0.0f64, |m, v| m.max(v.abs()));
    if h.re.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "Re H(Omega) = {:e} is not absorbed into the frequency; use an absorbing frequency shift",
            h.re
        )));
    }
    asymptotic_coefficients(omega, kernels.damping_at(omega)?, kernels.occupation_at(omega)?)
}

/// Finite-time coefficients `δΩ²(t)`, `Γ(t)`, `Γ_h(t)`, `Γ_f(t)` accumulated by
/// trapezoid quadrature of the time-domain kernels.
#[derive(Debug, Clone)]
pub struct CoefficientSchedule {
    dt: f64,
    omega: f64,
    shift: f64,
    // integrands D cos, D sin, N cos, N sin at t_j = j dt
    integrand: [Vec<f64>; 4],
    cumulative: [Vec<f64>; 4],
}

impl CoefficientSchedule {
    pub fn new(kernels: &KernelSet, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::domain("omega", format!("must be positive, got {omega}")));
        }
        let grid = kernels.grid;
        let fourier = Fourier::new(grid);
        let d_spec: Vec<Complex64> = kernels.dissipation.iter().map(|&d| Complex64::new(0.0, d)).collect();
        let d_t = fourier.to_time(&d_spec);
        let n_t = fourier.real_to_time(&kernels.noise);
        let zero = grid.zero_time_index();
        let dt = grid.time_step();
        let len = grid.count() - zero;
        let mut integrand: [Vec<f64>; 4] = Default::default();
        for j in 0..len {
            let t = j as f64 * dt;
            let (s, c) = (omega * t).sin_cos();
            let d = d_t[zero + j].re;
            let n = n_t[zero + j].re;
            integrand[0].push(d * c);
            integrand[1].push(d * s);
            integrand[2].push(n * c);
            integrand[3].push(n * s);
        }
        let cumulative = integrand.clone().map(|f| {
            let mut acc = Vec::with_capacity(f.len());
            let mut sum = 0.0;
            acc.push(0.0);
            for w in f.windows(2) {
                sum += 0.5 * dt * (w[0] + w[1]);
                acc.push(sum);
            }
            acc
        });
        Ok(Self {
            dt,
            omega,
            shift: kernels.freq_shift,
            integrand,
            cumulative,
        })
    }

    /// Largest time covered by the kernels.
    pub fn span(&self) -> f64 {
        (self.cumulative[0].len() - 1) as f64 * self.dt
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn at(&self, t: f64) -> Result<MasterCoefficients> {
        if !(t >= 0.0 && t <= self.span() * (1.0 + 1e-12)) {
            return Err(Error::Range(format!("t = {t} outside kernel span [0, {}]", self.span())));
        }
        let x = (t / self.dt).min((self.cumulative[0].len() - 1) as f64);
        let j = (x.floor() as usize).min(self.cumulative[0].len() - 2);
        let theta = x - j as f64;
        let value = |m: usize| {
            let f = &self.integrand[m];
            let end = f[j] * (1.0 - theta) + f[j + 1] * theta;
            self.cumulative[m][j] + 0.5 * self.dt * theta * (f[j] + end)
        };
        Ok(MasterCoefficients {
            delta_omega2: self.shift - 2.0 * value(0),
            gamma: value(1) / self.omega,
            gamma_h: value(2),
            gamma_f: value(3) / self.omega,
        })
    }

    /// Samples the schedule on `[0, duration]` as a CSV (`t,delta_omega2,gamma,gamma_h,gamma_f`).
    pub fn to_csv(&self, duration: f64, step: f64) -> Result<String> {
        let mut t = CsvTable::new(&["t", "delta_omega2", "gamma", "gamma_h", "gamma_f"]);
        let steps = (duration / step).round() as usize;
        for i in 0..=steps {
            let time = i as f64 * step;
            let c = self.at(time)?;
            t.row(&[time, c.delta_omega2, c.gamma, c.gamma_h, c.gamma_f]);
        }
        Ok(t.into_string())
    }
}

/// Finite-time coefficients at a single instant.
pub fn finite_time_coefficients(kernels: &KernelSet, omega: f64, t: f64) -> Result<MasterCoefficients> {
    CoefficientSchedule::new(kernels, omega)?.at(t)
}

/// Constant or time-dependent master-equation coefficients.
#[derive(Debug, Clone, Copy)]
pub enum CoefficientSource<'a> {
    Constant(MasterCoefficients),
    Schedule(&'a CoefficientSchedule),
}

impl CoefficientSource<'_> {
    pub fn at(&self, t: f64) -> Result<MasterCoefficients> {
        match self {
            CoefficientSource::Constant(c) => Ok(*c),
            CoefficientSource::Schedule(s) => s.at(t),
        }
    }

    /// Componentwise largest magnitudes over `[0, duration]`.
    pub fn envelope(&self, duration: f64) -> Result<MasterCoefficients> {
        match self {
            CoefficientSource::Constant(c) => Ok(MasterCoefficients {
                delta_omega2: c.delta_omega2.abs(),
                gamma: c.gamma.abs(),
                gamma_h: c.gamma_h.abs(),
                gamma_f: c.gamma_f.abs(),
            }),
            CoefficientSource::Schedule(s) => {
                if duration > s.span() {
                    return Err(Error::Range(format!(
                        "duration {duration} exceeds kernel span {}",
                        s.span()
                    )));
                }
                let mut m = MasterCoefficients::default();
                let samples = (duration / s.dt).ceil() as usize;
                for j in 0..=samples {
                    let c = s.at((j as f64 * s.dt).min(duration))?;
                    m.delta_omega2 = m.delta_omega2.max(c.delta_omega2.abs());
                    m.gamma = m.gamma.max(c.gamma.abs());
                    m.gamma_h = m.gamma_h.max(c.gamma_h.abs());
                    m.gamma_f = m.gamma_f.max(c.gamma_f.abs());
                }
                Ok(m)
            }
        }
    }
}

/// First and second cumulants of a Gaussian state (symmetrised covariances).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean_q: f64,
    pub mean_p: f64,
    pub cov_qq: f64,
    pub cov_qp: f64,
    pub cov_pp: f64,
}

impl GaussianState {
    /// Ground state of an oscillator of frequency `omega`.
    pub fn vacuum(omega: f64) -> Self {
        Self {
            mean_q: 0.0,
            mean_p: 0.0,
            cov_qq: 0.5 / omega,
            cov_qp: 0.0,
            cov_pp: 0.5 * omega,
        }
    }

    /// Thermal state with occupation `n`.
    pub fn thermal(omega: f64, occupation: f64) -> Self {
        Self {
            mean_q: 0.0,
            mean_p: 0.0,
            cov_qq: (0.5 + occupation) / omega,
            cov_qp: 0.0,
            cov_pp: (0.5 + occupation) * omega,
        }
    }

    pub fn displaced(self, q: f64, p: f64) -> Self {
        Self {
            mean_q: q,
            mean_p: p,
            ..self
        }
    }

    pub fn determinant(&self) -> f64 {
        self.cov_qq * self.cov_pp - self.cov_qp * self.cov_qp
    }

    /// `(σ_pp + Ω² σ_qq) / 2`.
    pub fn energy(&self, omega: f64) -> f64 {
        0.5 * (self.cov_pp + omega * omega * self.cov_qq)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.mean_q, self.mean_p, self.cov_qq, self.cov_qp, self.cov_pp];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("state", "non-finite entry"));
        }
        if self.cov_qq <= 0.0 || self.cov_pp <= 0.0 {
            return Err(Error::domain("state", "variances must be positive"));
        }
        if self.determinant() < 0.25 * (1.0 - 1e-12) {
            return Err(Error::domain(
                "state",
                format!("uncertainty product {} below 1/4", self.determinant()),
            ));
        }
        Ok(())
    }

    fn derivative(&self, omega2: f64, c: &MasterCoefficients) -> [f64; 5] {
        let w2 = omega2 + c.delta_omega2;
        let g2 = 2.0 * c.gamma;
        [
            self.mean_p,
            -w2 * self.mean_q - g2 * self.mean_p,
            2.0 * self.cov_qp,
            self.cov_pp - w2 * self.cov_qq - g2 * self.cov_qp + c.gamma_f,
            -2.0 * w2 * self.cov_qp - 2.0 * g2 * self.cov_pp + 2.0 * c.gamma_h,
        ]
    }

    fn axpy(&self, h: f64, k: &[f64; 5]) -> Self {
        Self {
            mean_q: self.mean_q + h * k[0],
            mean_p: self.mean_p + h * k[1],
            cov_qq: self.cov_qq + h * k[2],
            cov_qp: self.cov_qp + h * k[3],
            cov_pp: self.cov_pp + h * k[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSample {
    pub t: f64,
    pub state: GaussianState,
}

/// Cumulant trajectory of a mode.
#[derive(Debug, Clone)]
pub struct GaussianTrajectory {
    pub omega: f64,
    pub samples: Vec<GaussianSample>,
}

impl GaussianTrajectory {
    pub fn last(&self) -> &GaussianSample {
        self.samples.last().expect("trajectories hold the initial sample")
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.energy(self.omega)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["t", "mean_q", "mean_p", "cov_qq", "cov_qp", "cov_pp", "energy"]);
        for s in &self.samples {
            let st = &s.state;
            t.row(&[s.t, st.mean_q, st.mean_p, st.cov_qq, st.cov_qp, st.cov_pp, st.energy(self.omega)]);
        }
        t.into_string()
    }
}

/// Step bound for the cumulant integrator, `0.05 / max(Ω, 2Γ)`.
pub fn max_gaussian_step(omega: f64, gamma: f64) -> f64 {
    0.05 / omega.max(2.0 * gamma.abs())
}

/// Integrates the cumulant equations with classical fourth-order Runge-Kutta.
///
/// The step is shortened if needed so that it divides `duration`; every step is recorded.
pub fn evolve_gaussian(
    initial: &GaussianState,
    source: CoefficientSource<'_>,
    omega: f64,
    duration: f64,
    dt: f64,
) -> Result<GaussianTrajectory> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain("omega", format!("must be positive, got {omega}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::domain("duration", format!("must be non-negative, got {duration}")));
    }
    initial.validate()?;
    let env = source.envelope(duration)?;
    let bound = max_gaussian_step(omega, env.gamma);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::Stability {
            dt,
            suggested: bound,
            reason: "cumulant integrator requires dt <= 0.05 / max(Omega, 2 Gamma)".into(),
        });
    }
    let steps = ((duration / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { duration / steps as f64 } else { dt };
    let omega2 = omega * omega;
    let mut state = *initial;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(GaussianSample { t: 0.0, state });
    for i in 0..steps {
        let t = i as f64 * h;
        let c0 = source.at(t)?;
        let c1 = source.at(t + 0.5 * h)?;
        let c2 = source.at(t + h)?;
        let k1 = state.derivative(omega2, &c0);
        let k2 = state.axpy(0.5 * h, &k1).derivative(omega2, &c1);
        let k3 = state.axpy(0.5 * h, &k2).derivative(omega2, &c1);
        let k4 = state.axpy(h, &k3).derivative(omega2, &c2);
        let mut k = [0.0; 5];
        for m in 0..5 {
            k[m] = (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]) / 6.0;
        }
        state = state.axpy(h, &k);
        if [state.cov_qq, state.cov_pp, state.mean_q].iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability {
                dt,
                suggested: 0.5 * dt,
                reason: format!("cumulants diverged at t = {}", t + h),
            });
        }
        samples.push(GaussianSample {
            t: (i + 1) as f64 * h,
            state,
        });
    }
    Ok(GaussianTrajectory { omega, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_point_is_thermal() {
        let c = asymptotic_coefficients(2.0, 0.05, 0.7).unwrap();
        let s = GaussianState::thermal(2.0, 0.7);
        let d = s.derivative(4.0, &c);
        for v in d {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_large_step() {
        let c = asymptotic_coefficients(1.0, 0.01, 0.0).unwrap();
        let err = evolve_gaussian(&GaussianState::vacuum(1.0), CoefficientSource::Constant(c), 1.0, 1.0, 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
    }

    #[test]
    fn rejects_unphysical_state() {
        let s = GaussianState {
            mean_q: 0.0,
            mean_p: 0.0,
            cov_qq: 0.1,
            cov_qp: 0.0,
            cov_pp: 0.1,
        };
        assert!(s.validate().is_err());
    }
}
