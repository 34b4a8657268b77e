//! Dictionary between oscillator kernels and field self-energies.
//!
//! `Re Σ_R = H_R - (m² + p² - Ω²)`, `Im Σ_R = H_I = -d`, and the symmetric
//! self-energy enters through `noise_equiv = i Σ^(1)/2 = N`.

use crate::error::{Error, Result};
use crate::greens::{assemble, ModeSpec, PropagatorSet, Regulator};
use crate::grid::FrequencyGrid;
use crate::io::{parse_columns, CsvTable};
use crate::spectral::KernelSet;
use std::path::Path;
use std::sync::Arc;

/// Retarded and symmetric self-energy of one momentum mode sampled on a grid.
#[derive(Debug, Clone)]
pub struct SelfEnergyTable {
    pub grid: FrequencyGrid,
    pub re_sigma_r: Vec<f64>,
    pub im_sigma_r: Vec<f64>,
    /// `i Σ^(1) / 2`, real and non-negative.
    pub noise_equiv: Vec<f64>,
}

pub const SELF_ENERGY_HEADER: [&str; 4] = ["omega", "re_sigma_r", "im_sigma_r", "noise_equiv"];

impl SelfEnergyTable {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&SELF_ENERGY_HEADER);
        for k in 0..self.grid.count() {
            t.row(&[self.grid.omega(k), self.re_sigma_r[k], self.im_sigma_r[k], self.noise_equiv[k]]);
        }
        t.into_string()
    }

    pub fn from_csv_str(text: &str, source_name: &str) -> Result<Self> {
        let cols = parse_columns(text, source_name, &SELF_ENERGY_HEADER)?;
        let grid = FrequencyGrid::from_samples(&cols[0])?;
        let mut it = cols.into_iter().skip(1);
        let (re, im, noise) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        Ok(Self {
            grid,
            re_sigma_r: re,
            im_sigma_r: im,
            noise_equiv: noise,
        })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// `Re Σ_R` interpolated at `omega`.
    pub fn re_at(&self, omega: f64) -> Result<f64> {
        self.grid.interpolate(&self.re_sigma_r, omega)
    }

    pub fn im_at(&self, omega: f64) -> Result<f64> {
        self.grid.interpolate(&self.im_sigma_r, omega)
    }

    pub fn noise_at(&self, omega: f64) -> Result<f64> {
        self.grid.interpolate(&self.noise_equiv, omega)
    }

    /// Checks `Im Σ_R · ω <= 0` and `noise_equiv >= 0`, listing the offending frequencies.
    pub fn check_physical(&self) -> Result<()> {
        let scale = self.im_sigma_r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale;
        let wrong_sign: Vec<f64> = (0..self.grid.count())
            .filter(|&k| self.im_sigma_r[k] * self.grid.omega(k).signum() > tol)
            .map(|k| self.grid.omega(k))
            .collect();
        if !wrong_sign.is_empty() {
            return Err(Error::Physicality {
                what: "Im Sigma_R * omega > 0".into(),
                frequencies: wrong_sign,
            });
        }
        let negative: Vec<f64> = (0..self.grid.count())
            .filter(|&k| self.noise_equiv[k] < 0.0)
            .map(|k| self.grid.omega(k))
            .collect();
        if !negative.is_empty() {
            return Err(Error::Physicality {
                what: "negative symmetric self-energy".into(),
                frequencies: negative,
            });
        }
        Ok(())
    }
}

/// Translates kernels into the self-energy of the mode.
pub fn self_energy_from_kernels(kernels: &KernelSet, mode: &ModeSpec) -> Result<SelfEnergyTable> {
    mode.validate()?;
    let offset = mode.bare_dispersion() - mode.omega * mode.omega;
    Ok(SelfEnergyTable {
        grid: kernels.grid,
        re_sigma_r: kernels.h_re.iter().map(|&h| h - offset).collect(),
        im_sigma_r: kernels.h_im.clone(),
        noise_equiv: kernels.noise.clone(),
    })
}

/// Bath description recovered from a self-energy, on the positive half of the grid.
#[derive(Debug, Clone)]
pub struct EffectiveEnvironment {
    pub omega: Vec<f64>,
    /// `g² I(ω) = -2 Im Σ_R / ω`.
    pub coupling_density: Vec<f64>,
    /// `n = N/(2|d|) - 1/2`, `None` where the dissipation is too small to fix it.
    pub occupation: Vec<Option<f64>>,
}

impl EffectiveEnvironment {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["omega", "g2I", "n"]);
        for k in 0..self.omega.len() {
            t.row(&[self.omega[k], self.coupling_density[k], self.occupation[k].unwrap_or(f64::NAN)]);
        }
        t.into_string()
    }

    /// Frequencies at which the occupation could not be determined.
    pub fn undetermined(&self) -> Vec<f64> {
        self.omega
            .iter()
            .zip(&self.occupation)
            .filter(|(_, n)| n.is_none())
            .map(|(&w, _)| w)
            .collect()
    }
}

/// Relative size of `|d|` below which the occupation is reported as undetermined.
pub const UNDETERMINED_FRACTION: f64 = 1e-12;

/// Inverts the dictionary: kernels and effective bath from a self-energy.
///
/// The returned kernels take `Re H` verbatim from `Re Σ_R` (shift recorded as zero).
pub fn kernels_from_self_energy(
    sigma: &SelfEnergyTable,
    mode: &ModeSpec,
) -> Result<(KernelSet, EffectiveEnvironment)> {
    mode.validate()?;
    sigma.check_physical()?;
    let grid = sigma.grid;
    let offset = mode.bare_dispersion() - mode.omega * mode.omega;
    let dissipation: Vec<f64> = sigma.im_sigma_r.iter().map(|&v| -v).collect();
    let scale = dissipation.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut omega = Vec::new();
    let mut coupling_density = Vec::new();
    let mut occupation = Vec::new();
    let mut noisy_but_decoupled = Vec::new();
    let mut negative = Vec::new();
    for k in grid.positive() {
        let w = grid.omega(k);
        let d = dissipation[k];
        let noise = sigma.noise_equiv[k];
        omega.push(w);
        coupling_density.push(2.0 * d / w);
        if d == 0.0 && noise > 0.0 {
            noisy_but_decoupled.push(w);
            occupation.push(None);
        } else if d.abs() <= UNDETERMINED_FRACTION * scale || d == 0.0 {
            occupation.push(None);
        } else {
            let n = noise / (2.0 * d.abs()) - 0.5;
            if n < -1e-9 {
                negative.push(w);
            }
            occupation.push(Some(n));
        }
    }
    if !noisy_but_decoupled.is_empty() {
        return Err(Error::Physicality {
            what: "noise without dissipation".into(),
            frequencies: noisy_but_decoupled,
        });
    }
    if !negative.is_empty() {
        return Err(Error::Physicality {
            what: "negative occupation".into(),
            frequencies: negative,
        });
    }
    let kernels = KernelSet {
        grid,
        dissipation,
        noise: sigma.noise_equiv.clone(),
        h_re: sigma.re_sigma_r.iter().map(|&r| r + offset).collect(),
        h_im: sigma.im_sigma_r.clone(),
        freq_shift: 0.0,
        diagnostics: Vec::new(),
    };
    Ok((
        kernels,
        EffectiveEnvironment {
            omega,
            coupling_density,
            occupation,
        },
    ))
}

/// Propagators computed directly from the self-energy description.
pub fn build_propagators_from_self_energy(
    mode: &ModeSpec,
    sigma: &SelfEnergyTable,
    regulator: Regulator,
) -> Result<PropagatorSet> {
    mode.validate()?;
    let grid = sigma.grid;
    let base = mode.bare_dispersion();
    let stiffness: Vec<f64> = (0..grid.count())
        .map(|k| {
            let w = grid.omega(k);
            base - w * w + sigma.re_sigma_r[k]
        })
        .collect();
    assemble(mode, &grid, &stiffness, &sigma.im_sigma_r, &sigma.noise_equiv, regulator)
}

/// Symmetry properties asserted for a two-point function of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointSymmetry {
    pub stationary: bool,
    pub homogeneous: bool,
    pub isotropic: bool,
}

/// Two-point function blocks in the `(+p, -p)` mode basis.
#[derive(Debug, Clone)]
pub struct MomentumBlocks {
    pub momentum: f64,
    pub symmetry: TwoPointSymmetry,
    /// The `(+p, -p)` block.
    pub cross: Arc<PropagatorSet>,
    /// Largest magnitude found in the `(+p, +p)` and `(-p, -p)` blocks, if sampled.
    pub same_sign_max: Option<f64>,
}

/// One of the two real oscillators built from the `±p` pair.
#[derive(Debug, Clone)]
pub struct ModeOscillator {
    pub label: &'static str,
    pub propagator: Arc<PropagatorSet>,
}

/// Reduction of a `±p` pair to two independent oscillators sharing one propagator.
#[derive(Debug, Clone)]
pub struct TwoModeSpec {
    pub momentum: f64,
    pub modes: [ModeOscillator; 2],
    /// Unitary taking `(φ_{+p}, φ_{-p})` to the two real oscillators.
    pub unitary: [[f64; 2]; 2],
}

/// Same-sign blocks larger than this (relative to the cross block) are rejected.
pub const ZERO_BLOCK_TOLERANCE: f64 = 1e-12;

pub fn reduce_two_mode(blocks: &MomentumBlocks) -> Result<TwoModeSpec> {
    let s = blocks.symmetry;
    let mut missing = Vec::new();
    if !s.stationary {
        missing.push("stationary");
    }
    if !s.homogeneous {
        missing.push("homogeneous");
    }
    if !s.isotropic {
        missing.push("isotropic");
    }
    if !missing.is_empty() {
        return Err(Error::Precondition(format!(
            "two-mode reduction requires a {} two-point function",
            missing.join(", ")
        )));
    }
    if let Some(same) = blocks.same_sign_max {
        let scale = blocks.cross.hadamard.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if same > ZERO_BLOCK_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition(format!(
                "same-sign momentum blocks do not vanish (max {same:e})"
            )));
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(TwoModeSpec {
        momentum: blocks.momentum,
        modes: [
            ModeOscillator {
                label: "symmetric",
                propagator: Arc::clone(&blocks.cross),
            },
            ModeOscillator {
                label: "antisymmetric",
                propagator: Arc::clone(&blocks.cross),
            },
        ],
        unitary: [[r, r], [r, -r]],
    })
}
