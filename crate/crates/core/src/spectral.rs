//! Environment description and the dissipation, noise and response kernels it induces.

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::FrequencyGrid;
use crate::io::Table;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Coupling-weighted density of bath oscillators, `I(ω)`, even in `ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `I = 1` up to the grid edge.
    Ohmic,
    /// `I = Λ² / (Λ² + ω²)`.
    OhmicDrude { cutoff: f64 },
    /// Sampled on non-negative frequencies, interpolated in `|ω|`.
    Tabulated(Table),
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralDensity::Ohmic => Ok(()),
            SpectralDensity::OhmicDrude { cutoff } => {
                if cutoff.is_finite() && *cutoff > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("density.cutoff", format!("must be positive, got {cutoff}")))
                }
            }
            SpectralDensity::Tabulated(t) => {
                let bad: Vec<f64> = t
                    .x()
                    .iter()
                    .zip(t.y())
                    .filter(|(_, &v)| v < 0.0)
                    .map(|(&w, _)| w)
                    .collect();
                if bad.is_empty() {
                    Ok(())
                } else {
                    Err(Error::Physicality {
                        what: "negative spectral density".into(),
                        frequencies: bad,
                    })
                }
            }
        }
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        let w = omega.abs();
        match self {
            SpectralDensity::Ohmic => Ok(1.0),
            SpectralDensity::OhmicDrude { cutoff } => Ok(cutoff * cutoff / (cutoff * cutoff + w * w)),
            SpectralDensity::Tabulated(t) => t.eval(w),
        }
    }
}

/// Bath occupation `n(|ω|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Occupation {
    Vacuum,
    Thermal { temperature: f64 },
    /// Sampled on non-negative frequencies, interpolated in `|ω|`.
    Tabulated(Table),
}

impl Occupation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Occupation::Vacuum => Ok(()),
            Occupation::Thermal { temperature } => {
                if temperature.is_finite() && *temperature > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("occupation.T", format!("must be positive, got {temperature}")))
                }
            }
            Occupation::Tabulated(t) => {
                let bad: Vec<f64> = t
                    .x()
                    .iter()
                    .zip(t.y())
                    .filter(|(_, &v)| v < 0.0)
                    .map(|(&w, _)| w)
                    .collect();
                if bad.is_empty() {
                    Ok(())
                } else {
                    Err(Error::Physicality {
                        what: "negative occupation".into(),
                        frequencies: bad,
                    })
                }
            }
        }
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        let w = omega.abs();
        match self {
            Occupation::Vacuum => Ok(0.0),
            Occupation::Thermal { temperature } => Ok(1.0 / (w / temperature).exp_m1()),
            Occupation::Tabulated(t) => t.eval(w),
        }
    }
}

/// Coupling strength `g` together with the bath it couples to.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub coupling: f64,
    pub density: SpectralDensity,
    pub occupation: Occupation,
}

impl Environment {
    pub fn new(coupling: f64, density: SpectralDensity, occupation: Occupation) -> Self {
        Self {
            coupling,
            density,
            occupation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.coupling.is_finite() {
            return Err(Error::domain("environment.coupling", "must be finite"));
        }
        self.density.validate()?;
        self.occupation.validate()
    }

    /// `g² I(ω)`.
    pub fn coupling_density(&self, omega: f64) -> Result<f64> {
        Ok(self.coupling * self.coupling * self.density.eval(omega)?)
    }
}

/// How the constant part of `Re H` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FrequencyShift {
    /// `Re H` is the bare principal-value transform.
    #[default]
    None,
    /// Add a fixed constant.
    Constant(f64),
    /// Choose the constant so that `Re H(Ω) = 0` at the given frequency.
    AbsorbAt(f64),
}

/// Discretisation of the principal-value transform giving `Re H` from `Im H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KramersKronig {
    /// Exact discrete Hilbert pair on the grid: the time-domain kernel is causal.
    #[default]
    DiscreteHilbert,
    /// Midpoint sum skipping the singular sample.
    SymmetricExclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelOptions {
    pub shift: FrequencyShift,
    pub kramers_kronig: KramersKronig,
}

/// Non-fatal findings attached to computed objects.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Grid spacing too coarse to resolve a spectral feature.
    CoarseResolution { spacing: f64, feature: f64 },
    /// Free-form warning.
    Note(String),
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::CoarseResolution { spacing, feature } => write!(
                f,
                "grid spacing {spacing:.3e} exceeds a tenth of the spectral feature width {feature:.3e}"
            ),
            Diagnostic::Note(s) => f.write_str(s),
        }
    }
}

/// Dissipation `d`, noise `N` and response `H = H_R + i H_I` sampled on a grid.
///
/// `D(ω) = i d(ω)` with `d` real and odd; `H_I = -d`; `N` is real and even.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub grid: FrequencyGrid,
    pub dissipation: Vec<f64>,
    pub noise: Vec<f64>,
    pub h_re: Vec<f64>,
    pub h_im: Vec<f64>,
    /// Constant added to the principal-value part of `Re H`.
    pub freq_shift: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl KernelSet {
    /// Complex response `H(ω)` at a grid point.
    pub fn h(&self, k: usize) -> Complex64 {
        Complex64::new(self.h_re[k], self.h_im[k])
    }

    pub fn h_at(&self, omega: f64) -> Result<Complex64> {
        Ok(Complex64::new(
            self.grid.interpolate(&self.h_re, omega)?,
            self.grid.interpolate(&self.h_im, omega)?,
        ))
    }

    pub fn dissipation_at(&self, omega: f64) -> Result<f64> {
        self.grid.interpolate(&self.dissipation, omega)
    }

    pub fn noise_at(&self, omega: f64) -> Result<f64> {
        self.grid.interpolate(&self.noise, omega)
    }

    /// Damping rate `γ = d(Ω)/Ω` of a mode at `omega`.
    pub fn damping_at(&self, omega: f64) -> Result<f64> {
        Ok(self.dissipation_at(omega)? / omega)
    }

    /// Occupation implied by the kernels, `N / (2|d|) - 1/2`.
    pub fn occupation_at(&self, omega: f64) -> Result<f64> {
        let d = self.dissipation_at(omega)?.abs();
        if d == 0.0 {
            return Err(Error::Precondition(format!("dissipation vanishes at omega = {omega}")));
        }
        Ok(self.noise_at(omega)? / (2.0 * d) - 0.5)
    }
}

/// Samples the kernels of `env` on `grid`.
pub fn build_kernels(env: &Environment, grid: &FrequencyGrid, options: &KernelOptions) -> Result<KernelSet> {
    env.validate()?;
    let n = grid.count();
    let g2 = env.coupling * env.coupling;
    let mut dissipation = vec![0.0; n];
    let mut noise = vec![0.0; n];
    for k in grid.positive() {
        let w = grid.omega(k);
        let d = 0.5 * g2 * w * env.density.eval(w)?;
        let occ = env.occupation.eval(w)?;
        let m = grid.mirror(k);
        dissipation[k] = d;
        dissipation[m] = -d;
        noise[k] = (1.0 + 2.0 * occ) * d.abs();
        noise[m] = noise[k];
    }
    let h_im: Vec<f64> = dissipation.iter().map(|&d| -d).collect();
    let mut h_re = match options.kramers_kronig {
        KramersKronig::DiscreteHilbert => discrete_hilbert(grid, &h_im),
        KramersKronig::SymmetricExclusion => symmetric_exclusion(&dissipation),
    };
    for k in grid.positive() {
        let m = grid.mirror(k);
        let avg = 0.5 * (h_re[k] + h_re[m]);
        h_re[k] = avg;
        h_re[m] = avg;
    }
    let freq_shift = match options.shift {
        FrequencyShift::None => 0.0,
        FrequencyShift::Constant(c) => {
            if !c.is_finite() {
                return Err(Error::domain("freq_shift", "must be finite"));
            }
            c
        }
        FrequencyShift::AbsorbAt(omega) => -grid.interpolate(&h_re, omega)?,
    };
    h_re.iter_mut().for_each(|v| *v += freq_shift);

    let mut diagnostics = Vec::new();
    if let SpectralDensity::OhmicDrude { cutoff } = env.density {
        if grid.spacing() > cutoff / 10.0 {
            diagnostics.push(Diagnostic::CoarseResolution {
                spacing: grid.spacing(),
                feature: cutoff,
            });
        }
    }
    Ok(KernelSet {
        grid: *grid,
        dissipation,
        noise,
        h_re,
        h_im,
        freq_shift,
        diagnostics,
    })
}

/// `Re H` from `Im H` by the exact discrete Hilbert pair: the odd time part of
/// `H` is mirrored with `sign(t)` so that the time-domain kernel vanishes for `t < 0`.
pub fn discrete_hilbert(grid: &FrequencyGrid, h_im: &[f64]) -> Vec<f64> {
    let fourier = Fourier::new(*grid);
    let odd: Vec<Complex64> = h_im.iter().map(|&v| Complex64::new(0.0, v)).collect();
    let odd_t = fourier.to_time(&odd);
    let zero = grid.zero_time_index();
    let even_t: Vec<Complex64> = odd_t
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let s = if i == 0 || i == zero {
                0.0
            } else if i > zero {
                1.0
            } else {
                -1.0
            };
            Complex64::new(s * z.re, 0.0)
        })
        .collect();
    fourier.to_frequency(&even_t).iter().map(|z| z.re).collect()
}

/// `Re H(ω_j) = (1/π) Σ_{k≠j} Δω d(ω_k) / (ω_j - ω_k)`, evaluated as a Toeplitz product.
pub fn symmetric_exclusion(dissipation: &[f64]) -> Vec<f64> {
    let n = dissipation.len();
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut kernel = vec![Complex64::new(0.0, 0.0); len];
    for m in 1..n {
        kernel[m] = Complex64::new(1.0 / m as f64, 0.0);
        kernel[len - m] = Complex64::new(-1.0 / m as f64, 0.0);
    }
    let mut data = vec![Complex64::new(0.0, 0.0); len];
    for (slot, &d) in data.iter_mut().zip(dissipation) {
        slot.re = d;
    }
    fwd.process(&mut kernel);
    fwd.process(&mut data);
    for (a, b) in data.iter_mut().zip(&kernel) {
        *a *= b;
    }
    inv.process(&mut data);
    let scale = 1.0 / (PI * len as f64);
    data[..n].iter().map(|z| z.re * scale).collect()
}

/// Residuals of the fluctuation-dissipation relation `N = (1 + 2n)|d|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdtReport {
    /// Largest `|N - (1 + 2n)|d||`.
    pub max_abs: f64,
    /// Largest residual relative to `max |N|`.
    pub max_rel: f64,
}

pub fn verify_fdt(kernels: &KernelSet, occupation: &Occupation) -> Result<FdtReport> {
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..kernels.grid.count() {
        let w = kernels.grid.omega(k);
        let expected = (1.0 + 2.0 * occupation.eval(w)?) * kernels.dissipation[k].abs();
        max_abs = max_abs.max((kernels.noise[k] - expected).abs());
        scale = scale.max(kernels.noise[k].abs());
    }
    Ok(FdtReport {
        max_abs,
        max_rel: if scale > 0.0 { max_abs / scale } else { max_abs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drude(g: f64, cutoff: f64, t: f64) -> Environment {
        Environment::new(
            g,
            SpectralDensity::OhmicDrude { cutoff },
            Occupation::Thermal { temperature: t },
        )
    }

    #[test]
    fn parity_and_fdt() {
        let grid = FrequencyGrid::new(20.0, 512).unwrap();
        let k = build_kernels(&drude(0.3, 5.0, 1.5), &grid, &KernelOptions::default()).unwrap();
        for i in 0..512 {
            let m = grid.mirror(i);
            assert_eq!(k.dissipation[i], -k.dissipation[m]);
            assert_eq!(k.noise[i], k.noise[m]);
            assert_eq!(k.h_re[i], k.h_re[m]);
            assert!(k.noise[i] >= 0.0);
        }
        let fdt = verify_fdt(&k, &Occupation::Thermal { temperature: 1.5 }).unwrap();
        assert!(fdt.max_rel <= 1e-12);
    }

    #[test]
    fn vacuum_noise_is_half_of_symmetric_dissipation() {
        let grid = FrequencyGrid::new(10.0, 128).unwrap();
        let env = Environment::new(0.5, SpectralDensity::Ohmic, Occupation::Vacuum);
        let k = build_kernels(&env, &grid, &KernelOptions::default()).unwrap();
        for i in 0..128 {
            let w = grid.omega(i);
            assert!((k.noise[i] - 0.25 * w.abs() * 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_temperature_is_rejected() {
        let grid = FrequencyGrid::new(10.0, 128).unwrap();
        let err = build_kernels(&drude(0.3, 5.0, -1.0), &grid, &KernelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("occupation.T"));
    }

    #[test]
    fn absorb_shift_zeroes_response_at_mode() {
        let grid = FrequencyGrid::new(40.0, 4096).unwrap();
        let opts = KernelOptions {
            shift: FrequencyShift::AbsorbAt(1.3),
            ..Default::default()
        };
        let k = build_kernels(&drude(0.3, 5.0, 1.0), &grid, &opts).unwrap();
        assert!(k.h_at(1.3).unwrap().re.abs() < 1e-14);
        assert!(k.freq_shift > 0.0);
    }

    #[test]
    fn coarse_drude_grid_is_flagged() {
        let grid = FrequencyGrid::new(10.0, 16).unwrap();
        let k = build_kernels(&drude(0.3, 1.0, 1.0), &grid, &KernelOptions::default()).unwrap();
        assert!(matches!(k.diagnostics[0], Diagnostic::CoarseResolution { .. }));
    }

    #[test]
    fn tabulated_density_must_cover_the_grid() {
        let t = Table::new(vec![0.0, 1.0], vec![1.0, 1.0], "short").unwrap();
        let env = Environment::new(0.1, SpectralDensity::Tabulated(t), Occupation::Vacuum);
        let grid = FrequencyGrid::new(2.0, 16).unwrap();
        assert!(matches!(
            build_kernels(&env, &grid, &KernelOptions::default()),
            Err(Error::Range(_))
        ));
    }
}
