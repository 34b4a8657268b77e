//! Decay and creation rates, the self-energy components they build, and
//! the quasiparticle pole of a mode.

use crate::correspond::{EffectiveEnvironment, SelfEnergyTable};
use crate::error::{Error, Result};
use crate::greens::ModeSpec;
use crate::io::CsvTable;
use crate::spectral::Environment;
use num_complex::Complex64;

/// Decay (`minus`) and creation (`plus`) rates at one positive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub omega: f64,
    pub minus: f64,
    pub plus: f64,
}

impl RatePair {
    /// Rates from `g² I(ω)` and `n(ω)`.
    pub fn from_bath(omega: f64, coupling_density: f64, occupation: f64) -> Self {
        Self {
            omega,
            minus: 0.5 * coupling_density * (1.0 + occupation),
            plus: 0.5 * coupling_density * occupation,
        }
    }
}

/// `Γ∓(|ω|) = g² I (1 + n, n) / 2`.
pub fn decay_rates(env: &Environment, omega: f64) -> Result<RatePair> {
    env.validate()?;
    let w = omega.abs();
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::domain("omega", format!("rates need a non-zero frequency, got {omega}")));
    }
    Ok(RatePair::from_bath(w, env.coupling_density(w)?, env.occupation.eval(w)?))
}

/// Rates from a reconstructed bath; `None` where the occupation is undetermined.
pub fn rates_from_effective(env: &EffectiveEnvironment) -> Vec<Option<RatePair>> {
    env.omega
        .iter()
        .zip(&env.coupling_density)
        .zip(&env.occupation)
        .map(|((&w, &g2i), n)| n.map(|n| RatePair::from_bath(w, g2i, n)))
        .collect()
}

/// Self-energy components assembled from rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaComponents {
    pub omega: f64,
    pub sigma_21: Complex64,
    pub sigma_12: Complex64,
    pub im_sigma_r: f64,
    /// `Σ^(1)`, purely imaginary.
    pub sigma_1: Complex64,
}

/// Components at signed `omega` from the rates at `|omega|`.
///
/// For `ω < 0` the decay and creation roles are exchanged.
pub fn sigma_components_from_rates(rates: &RatePair, omega: f64) -> SigmaComponents {
    let w = omega.abs();
    let (into, out) = if omega > 0.0 {
        (rates.minus, rates.plus)
    } else {
        (rates.plus, rates.minus)
    };
    let sigma_21 = Complex64::new(0.0, 2.0 * w * into);
    let sigma_12 = Complex64::new(0.0, 2.0 * w * out);
    let im_sigma_r = (0.5 * Complex64::i() * (sigma_21 - sigma_12)).re;
    let sigma_1 = -sigma_21 - sigma_12;
    SigmaComponents {
        omega,
        sigma_21,
        sigma_12,
        im_sigma_r,
        sigma_1,
    }
}

/// Rates and components on every positive grid frequency, as the rate CSV.
pub fn rate_sweep_csv(rates: &[RatePair]) -> String {
    let mut t = CsvTable::new(&["omega", "gamma_minus", "gamma_plus", "im_sigma_r", "sigma1_over_i"]);
    for r in rates {
        let c = sigma_components_from_rates(r, r.omega);
        t.row(&[r.omega, r.minus, r.plus, c.im_sigma_r, c.sigma_1.im]);
    }
    t.into_string()
}

/// Dressed pole of a mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiparticleSolution {
    pub energy: f64,
    /// `γ_p = -Im Σ_R(E_p) / E_p`.
    pub width: f64,
    /// Occupation at the pole, if the dissipation there is non-zero.
    pub occupation: Option<f64>,
    /// `γ_p <= 0.1 E_p`.
    pub long_lived: bool,
    /// Every root located on the grid, ascending.
    pub roots: Vec<f64>,
}

const RELAXATION: f64 = 0.5;
const MAX_ITER: usize = 10_000;

/// Solves `E² = m² + p² + Re Σ_R(E)` for the positive root nearest the bare energy.
pub fn solve_on_shell(sigma: &SelfEnergyTable, mode: &ModeSpec) -> Result<QuasiparticleSolution> {
    mode.validate()?;
    let grid = sigma.grid;
    let base = mode.bare_dispersion();
    let w_max = grid.omega_max();
    let residual = |e: f64| -> f64 { e * e - base - grid.interpolate_clamped(&sigma.re_sigma_r, e) };

    let mut roots = Vec::new();
    // Damped fixed point from the bare energy.
    let start = base.max(0.0).sqrt().clamp(grid.spacing(), w_max);
    let mut e = start;
    for _ in 0..MAX_ITER {
        let target = (base + grid.interpolate_clamped(&sigma.re_sigma_r, e)).max(0.0).sqrt();
        let next = (1.0 - RELAXATION) * e + RELAXATION * target;
        if (next - e).abs() <= 1e-15 * next.max(1.0) {
            e = next;
            break;
        }
        e = next;
    }
    if e > 0.0 && e <= w_max && residual(e).abs() <= 1e-10 * e * e.max(1.0) {
        roots.push(e);
    }

    // Bracketing scan of the positive half, refined by bisection.
    let pos: Vec<f64> = grid.positive().map(|k| grid.omega(k)).collect();
    for pair in pos.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ra, rb) = (residual(a), residual(b));
        if ra == 0.0 {
            roots.push(a);
        } else if ra * rb < 0.0 {
            roots.push(bisect(&residual, a, b, ra));
        }
    }
    if let Some(&last) = pos.last() {
        if residual(last) == 0.0 {
            roots.push(last);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
    if roots.is_empty() {
        return Err(Error::RootNotFound(format!(
            "no positive root of E^2 = {base} + Re Sigma_R(E) on (0, {w_max}]"
        )));
    }
    let reference = base.max(0.0).sqrt();
    let energy = *roots
        .iter()
        .min_by(|a, b| (*a - reference).abs().total_cmp(&(*b - reference).abs()))
        .expect("non-empty");
    let im = sigma.im_at(energy)?;
    let width = -im / energy;
    let occupation = if im != 0.0 {
        Some(sigma.noise_at(energy)? / (2.0 * im.abs()) - 0.5)
    } else {
        None
    };
    Ok(QuasiparticleSolution {
        energy,
        width,
        occupation,
        long_lived: width.abs() <= 0.1 * energy,
        roots,
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
