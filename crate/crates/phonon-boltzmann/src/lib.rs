//! Numerical study of the linearized phonon Boltzmann equation for the
//! quartic (FPU-beta) chain and its fractional diffusion limit.
//!
//! The library assembles the linearized collision operator on the torus,
//! verifies its degeneracy structure (collision frequency vanishing like
//! |sin pi k|^{5/3}), evaluates the Laplace-Fourier symbols whose limits
//! define the diffusion constants kappa1, kappa2, kappa3, and integrates the
//! rescaled kinetic equation to watch the temperature mode approach
//! exp(-kappa |xi|^{8/5} t) with kappa = kappa1 - kappa2^2/kappa3.

pub mod cache;
pub mod collision;
pub mod config;
pub mod dft;
pub mod dispersion;
pub mod error;
pub mod fracdiff;
pub mod grid;
pub mod kernel;
pub mod linop;
pub mod manifest;
pub mod quad;
pub mod sim;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
