//! Quantum Brownian motion representation of interacting field modes.
//!
//! A field mode of momentum `p` coupled to an environment is described either
//! by oscillator kernels (dissipation `D`, noise `N`, response `H`) or by the
//! field self-energies `Σ_R`, `Σ^(1)`. This crate builds the kernels, the full
//! propagator family, the dictionary between the two descriptions, the decay
//! and creation rates, the reduced master-equation dynamics, and a stochastic
//! Langevin unravelling.
//!
//! Units: `ħ = c = 1`. Fourier convention: `G(Δ) = ∫ dω/2π e^{-iωΔ} G(ω)`.

pub mod acceptance;
pub mod correspond;
pub mod error;
pub mod fourier;
pub mod greens;
pub mod grid;
pub mod io;
pub mod langevin;
pub mod master;
pub mod rates;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
