//! Nearest-neighbour chain dispersion on the torus and the four-phonon
//! resonance geometry.
//!
//! omega(k) = |sin(pi k)|. The resonance manifold
//! omega(k) + omega(k1) = omega(k') + omega(k + k1 - k') has, for fixed
//! (k, k'), the trivial root k1 = k' and a single nontrivial root with the
//! closed form implemented by [`resonance_partner`].

use crate::error::{Error, Result};
use crate::grid::{sym_view, unit_view};
use crate::quad::scan_roots;
use std::f64::consts::PI;

pub fn omega(k: f64) -> f64 {
    (PI * k).sin().abs()
}

/// Derivative of omega in the symmetric view; odd, discontinuous at 0.
pub fn omega_prime(k: f64) -> Result<f64> {
    let ks = sym_view(k);
    if ks == 0.0 {
        return Err(Error::Domain(format!(
            "omega_prime undefined at k = {k} (k = 0 mod 1)"
        )));
    }
    Ok(ks.signum() * PI * (PI * ks).cos())
}

/// Derivative of sin(pi k) in the unit-view interior (0, 1); used by the
/// collision reduction where all arguments already live in (0, 1).
pub fn omega_prime_unit(k: f64) -> f64 {
    PI * (PI * k).cos()
}

pub fn f_plus(k: f64, kp: f64) -> f64 {
    let c = (PI * k).cos() + (PI * kp).cos();
    c * c + 4.0 * (PI * k).sin() * (PI * kp).sin()
}

pub fn f_minus(k: f64, kp: f64) -> f64 {
    let c = (PI * k).cos() + (PI * kp).cos();
    c * c - 4.0 * (PI * k).sin() * (PI * kp).sin()
}

/// Closed form for the nontrivial resonance root k1 in the unit view.
/// Returns the bisection fallback root when the arcsin argument leaves
/// [-1, 1] by more than round-off, and `NoPartner` when no bracketed root
/// exists either.
pub fn resonance_partner(k: f64, kp: f64) -> Result<f64> {
    let k = unit_view(k);
    let kp = unit_view(kp);
    let d = (kp - k).abs();
    let arg = (PI * d / 2.0).tan() * (PI * (k + kp) / 2.0).cos();
    if arg.abs() <= 1.0 + 1e-12 && arg.is_finite() {
        let a = arg.clamp(-1.0, 1.0);
        return Ok(unit_view((kp - k) / 2.0 + a.asin() / PI));
    }
    // Bracketed fallback on the resonance defect, skipping the trivial root.
    let mut g = |k1: f64| resonance_defect(k, kp, k1);
    let roots = scan_roots(&mut g, 1e-9, 1.0 - 1e-9, 4001);
    roots
        .into_iter()
        .find(|r| (r - kp).abs() > 1e-7 && ((r - kp).abs() - 1.0).abs() > 1e-7)
        .ok_or(Error::NoPartner(k, kp))
}

/// Signed resonance defect G(k1) = omega(k) + omega(k1) - omega(k') - omega(k + k1 - k').
pub fn resonance_defect(k: f64, kp: f64, k1: f64) -> f64 {
    omega(k) + omega(k1) - omega(kp) - omega(k + k1 - kp)
}

/// |G(k1)| for a candidate partner.
pub fn resonance_residual(k: f64, kp: f64, k1: f64) -> f64 {
    resonance_defect(k, kp, k1).abs()
}

/// Minimum of the three-phonon defect omega(k) + omega(k1) - omega(k + k1)
/// over the grid product, with its argmin. The minimum stays >= 0: three-wave
/// processes are kinematically forbidden for this dispersion, which is why
/// the collision operator is quartic.
pub fn three_phonon_gap(nodes: &[f64]) -> (f64, (f64, f64)) {
    let mut best = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    for &k in nodes {
        let wk = omega(k);
        for &k1 in nodes {
            let g = wk + omega(k1) - omega(k + k1);
            if g < best {
                best = g;
                arg = (k, k1);
            }
        }
    }
    (best, arg)
}
