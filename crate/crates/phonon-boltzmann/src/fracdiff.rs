//! Exact spectral solver for the limiting fractional heat equation
//! d_t T + (kappa/Tbar^{6/5}) (-Delta)^{4/5} T = 0 and the slaved relation
//! between the singular mode S and T.

use crate::error::{Error, Result};
use crate::symbols::KappaSet;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct DiffusionParams {
    pub kappa_eff: f64,
    pub tbar: f64,
}

impl DiffusionParams {
    pub fn new(kappas: &KappaSet, tbar: f64) -> Result<Self> {
        if kappas.kappa2 * kappas.kappa2 >= kappas.kappa1 * kappas.kappa3 {
            return Err(Error::Domain(
                "kappa2^2 >= kappa1*kappa3: effective diffusivity not positive".into(),
            ));
        }
        if !(tbar > 0.0) {
            return Err(Error::Domain(format!("Tbar must be positive, got {tbar}")));
        }
        Ok(DiffusionParams {
            kappa_eff: kappas.kappa_eff,
            tbar,
        })
    }

    /// Decay rate of mode xi: (kappa/Tbar^{6/5}) |xi|^{8/5}.
    pub fn rate(&self, xi: f64) -> f64 {
        self.kappa_eff / self.tbar.powf(1.2) * xi.abs().powf(1.6)
    }
}

/// T_hat(t, xi) = exp(-rate(xi) t) T_hat0(xi), exact in Fourier space.
pub fn evolve_hat(params: &DiffusionParams, t0_hat: &[Complex64], xis: &[f64], t: f64) -> Result<Vec<Complex64>> {
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    if t0_hat.len() != xis.len() {
        return Err(Error::Domain("mode/frequency length mismatch".into()));
    }
    Ok(t0_hat
        .iter()
        .zip(xis.iter())
        .map(|(&c, &xi)| c * (-params.rate(xi) * t).exp())
        .collect())
}

/// S_hat = sign (kappa2/kappa3) |xi|^{3/5} T_hat. The physical sign is -1;
/// it is a parameter because the simulation determines it empirically.
pub fn slaved_s_hat(kappas: &KappaSet, t_hat: &[Complex64], xis: &[f64], sign: f64) -> Vec<Complex64> {
    t_hat
        .iter()
        .zip(xis.iter())
        .map(|(&c, &xi)| c * sign * (kappas.kappa2 / kappas.kappa3) * xi.abs().powf(0.6))
        .collect()
}

pub use crate::dft::render_real as real_space_render;
