#![allow(dead_code)]

use qbm_core::spectral::{Environment, Occupation, SpectralDensity};

pub fn drude(g: f64, cutoff: f64, temperature: f64) -> Environment {
    Environment::new(g, SpectralDensity::OhmicDrude { cutoff }, Occupation::Thermal { temperature })
}

pub fn drude_vacuum(g: f64, cutoff: f64) -> Environment {
    Environment::new(g, SpectralDensity::OhmicDrude { cutoff }, Occupation::Vacuum)
}

/// Bose-Einstein occupation.
pub fn bose(omega: f64, temperature: f64) -> f64 {
    1.0 / ((omega.abs() / temperature).exp() - 1.0)
}

/// `Re H` of a Drude bath with an infinite band: `-(g²/2) Λ³ / (Λ² + ω²)`.
pub fn drude_h_re(g: f64, cutoff: f64, omega: f64) -> f64 {
    -0.5 * g * g * cutoff.powi(3) / (cutoff * cutoff + omega * omega)
}

/// Time-domain dissipation kernel of a Drude bath: `(g² Λ² / 4) sign(t) e^{-Λ|t|}`.
pub fn drude_d_time(g: f64, cutoff: f64, t: f64) -> f64 {
    0.25 * g * g * cutoff * cutoff * t.signum() * (-cutoff * t.abs()).exp()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
