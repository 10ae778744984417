//! Dense discrete Fourier transform over the periodic box in x.
//!
//! Mode counts here are tiny (M = 64 by default), so the O(M^2) direct sum
//! is cheaper than pulling in an FFT and keeps the transform exactly
//! symmetric under the round-trip test.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Forward transform, normalized so coefficients are Fourier amplitudes:
/// F_j = (1/M) sum_m f_m exp(-2 pi i j m / M).
pub fn forward(values: &[Complex64]) -> Vec<Complex64> {
    let m = values.len();
    let mut out = vec![Complex64::default(); m];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::default();
        for (i, &v) in values.iter().enumerate() {
            let phase = -2.0 * PI * (j * i % m) as f64 / m as f64;
            acc += v * Complex64::new(phase.cos(), phase.sin());
        }
        *o = acc / m as f64;
    }
    out
}

pub fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let v: Vec<Complex64> = values.iter().map(|&x| Complex64::from(x)).collect();
    forward(&v)
}

/// Inverse transform: f_m = sum_j F_j exp(+2 pi i j m / M).
pub fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len();
    let mut out = vec![Complex64::default(); m];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::default();
        for (j, &c) in coeffs.iter().enumerate() {
            let phase = 2.0 * PI * (j * i % m) as f64 / m as f64;
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        *o = acc;
    }
    out
}

/// Largest deviation from conjugate symmetry F_{M-j} = conj(F_j).
pub fn symmetry_defect(coeffs: &[Complex64]) -> f64 {
    let m = coeffs.len();
    let mut worst: f64 = coeffs[0].im.abs();
    for j in 1..m {
        worst = worst.max((coeffs[j] - coeffs[(m - j) % m].conj()).norm());
    }
    worst
}

/// Inverse transform of a conjugate-symmetric spectrum to real samples.
pub fn render_real(coeffs: &[Complex64]) -> Result<Vec<f64>> {
    let scale: f64 = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let defect = symmetry_defect(coeffs);
    if defect > 1e-10 * scale.max(1e-300) {
        return Err(Error::Domain(format!(
            "spectrum is not conjugate-symmetric (defect {defect:.3e}, scale {scale:.3e})"
        )));
    }
    Ok(inverse(coeffs).iter().map(|c| c.re).collect())
}

/// Physical frequency of mode j on a box of length `lx` (aliased to the
/// symmetric range |xi| <= pi M / lx).
pub fn xi_of_mode(j: usize, m: usize, lx: f64) -> f64 {
    let js = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
    2.0 * PI * js / lx
}
