//! Mode propagators in frequency space and their time-domain images.

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::FrequencyGrid;
use crate::spectral::{Diagnostic, KernelSet};
use num_complex::Complex64;

/// A single field mode of bare frequency `Ω`.
///
/// For field-theory inputs the bare dispersion `m² + |p|²` may differ from `Ω²`
/// (the difference is carried by the frequency shift).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub omega: f64,
    pub mass: Option<f64>,
    pub momentum: Option<f64>,
}

impl ModeSpec {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            mass: None,
            momentum: None,
        }
    }

    /// Mode of a relativistic field with `Ω = sqrt(m² + p²)`.
    pub fn field(mass: f64, momentum: f64) -> Self {
        Self {
            omega: (mass * mass + momentum * momentum).sqrt(),
            mass: Some(mass),
            momentum: Some(momentum),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::domain("mode.omega", format!("must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// `m² + p²` when given, otherwise `Ω²`.
    pub fn bare_dispersion(&self) -> f64 {
        match (self.mass, self.momentum) {
            (None, None) => self.omega * self.omega,
            (m, p) => {
                let m = m.unwrap_or(0.0);
                let p = p.unwrap_or(0.0);
                m * m + p * p
            }
        }
    }
}

/// Infinitesimal damping used when the environment is (nearly) transparent at the pole.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Regulator {
    /// `ε = 10 Δω`, applied when `|H_I(Ω)| < ε Ω`.
    #[default]
    Auto,
    Off,
    /// Always apply the given `ε`.
    Fixed(f64),
}

/// The full family of two-point functions of one mode.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    pub grid: FrequencyGrid,
    pub mode: ModeSpec,
    pub retarded: Vec<Complex64>,
    pub advanced: Vec<Complex64>,
    pub feynman: Vec<Complex64>,
    pub dyson: Vec<Complex64>,
    pub wightman_minus: Vec<Complex64>,
    pub wightman_plus: Vec<Complex64>,
    pub hadamard: Vec<Complex64>,
    pub pauli_jordan: Vec<Complex64>,
    /// The `ε` actually applied in the denominator, zero if none.
    pub regulator: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl PropagatorSet {
    /// Export names paired with the sampled values, in a fixed order.
    pub fn named(&self) -> [(&'static str, &[Complex64]); 8] {
        [
            ("g_ret", &self.retarded),
            ("g_adv", &self.advanced),
            ("g_feynman", &self.feynman),
            ("g_dyson", &self.dyson),
            ("g_minus", &self.wightman_minus),
            ("g_plus", &self.wightman_plus),
            ("g_hadamard", &self.hadamard),
            ("g_pauli_jordan", &self.pauli_jordan),
        ]
    }
}

/// Propagators of `mode` dressed by the kernels `H`, `N`.
pub fn build_propagators(mode: &ModeSpec, kernels: &KernelSet, regulator: Regulator) -> Result<PropagatorSet> {
    mode.validate()?;
    let grid = kernels.grid;
    let omega2 = mode.omega * mode.omega;
    let stiffness: Vec<f64> = (0..grid.count())
        .map(|k| {
            let w = grid.omega(k);
            omega2 - w * w + kernels.h_re[k]
        })
        .collect();
    assemble(mode, &grid, &stiffness, &kernels.h_im, &kernels.noise, regulator)
}

/// Shared algebra for both the kernel and the self-energy description.
///
/// `stiffness` is the real part of `-i / G_R`, `damping` its imaginary part
/// before regularisation, `noise` the symmetric kernel.
pub(crate) fn assemble(
    mode: &ModeSpec,
    grid: &FrequencyGrid,
    stiffness: &[f64],
    damping: &[f64],
    noise: &[f64],
    regulator: Regulator,
) -> Result<PropagatorSet> {
    let n = grid.count();
    let eps = match regulator {
        Regulator::Off => 0.0,
        Regulator::Fixed(e) => {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::domain("regulator", format!("must be non-negative, got {e}")));
            }
            e
        }
        Regulator::Auto => {
            let e = 10.0 * grid.spacing();
            let k = grid.nearest_index(mode.omega);
            if damping[k].abs() < e * mode.omega {
                e
            } else {
                0.0
            }
        }
    };
    let mut set = PropagatorSet {
        grid: *grid,
        mode: *mode,
        retarded: Vec::with_capacity(n),
        advanced: Vec::with_capacity(n),
        feynman: Vec::with_capacity(n),
        dyson: Vec::with_capacity(n),
        wightman_minus: Vec::with_capacity(n),
        wightman_plus: Vec::with_capacity(n),
        hadamard: Vec::with_capacity(n),
        pauli_jordan: Vec::with_capacity(n),
        regulator: eps,
        diagnostics: Vec::new(),
    };
    let i = Complex64::i();
    for k in 0..n {
        let w = grid.omega(k);
        let a = stiffness[k];
        let b = damping[k] - eps * w;
        let den = a * a + b * b;
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Singularity { omega: w });
        }
        let noise_k = noise[k];
        let gr = -i / Complex64::new(a, b);
        set.retarded.push(gr);
        set.advanced.push(gr.conj());
        set.feynman.push(Complex64::new(noise_k, -a) / den);
        set.dyson.push(Complex64::new(noise_k, a) / den);
        let gm = (noise_k + damping[k]) / den;
        let gp = (noise_k - damping[k]) / den;
        set.wightman_minus.push(gm.into());
        set.wightman_plus.push(gp.into());
        set.hadamard.push((2.0 * noise_k / den).into());
        set.pauli_jordan.push((gp - gm).into());
    }
    Ok(set)
}

/// A function on the conjugate time grid of a [`FrequencyGrid`], in ascending time order.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Samples with `t >= 0`, starting at `t = 0`.
    pub fn causal_part(&self) -> &[Complex64] {
        &self.values[self.grid.zero_time_index()..]
    }
}

/// `G(t) = ∫ dω/2π e^{-iωt} G(ω)` on the conjugate time grid. No windowing.
pub fn to_time_domain(grid: &FrequencyGrid, values: &[Complex64]) -> Result<TimeSeries> {
    if values.len() != grid.count() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a grid of {}",
            values.len(),
            grid.count()
        )));
    }
    Ok(TimeSeries {
        grid: *grid,
        values: Fourier::new(*grid).to_time(values),
    })
}

/// Exact inverse of [`to_time_domain`].
pub fn to_frequency_domain(series: &TimeSeries) -> Vec<Complex64> {
    Fourier::new(series.grid).to_frequency(&series.values)
}

/// Relative L1 mass of a time series at negative times.
pub fn negative_time_mass(series: &TimeSeries) -> f64 {
    let z = series.grid.zero_time_index();
    let neg: f64 = series.values[..z].iter().map(|v| v.norm()).sum();
    let total: f64 = series.values.iter().map(|v| v.norm()).sum();
    if total > 0.0 {
        neg / total
    } else {
        0.0
    }
}

/// Relative L1 mass of `G_R(t)` at `t < 0`.
pub fn causality_violation(set: &PropagatorSet) -> Result<f64> {
    Ok(negative_time_mass(&to_time_domain(&set.grid, &set.retarded)?))
}
