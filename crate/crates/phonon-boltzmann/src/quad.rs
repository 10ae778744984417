//! Gauss-Legendre panels, adaptive subdivision, and root bracketing.
//!
//! All integrands here are smooth after the square-root substitutions applied
//! by the callers, so fixed-order panels with dyadic refinement converge fast
//! and keep every evaluation deterministic.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

static GL8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL32: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();

pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    GL8.get_or_init(|| gauss_legendre(8))
}

pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    GL16.get_or_init(|| gauss_legendre(16))
}

pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    GL32.get_or_init(|| gauss_legendre(32))
}

/// Single Gauss-Legendre panel of `f` over [a, b].
pub fn gl_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (xi, wi) in rule.0.iter().zip(rule.1.iter()) {
        acc += wi * f(mid + half * xi);
    }
    half * acc
}

fn adaptive_gl_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    max_depth: u32,
    achieved: &mut f64,
) -> f64 {
    let rule = gl16();
    let mid = 0.5 * (a + b);
    let coarse = gl_panel(f, a, b, rule);
    let fine = gl_panel(f, a, mid, rule) + gl_panel(f, mid, b, rule);
    let err = (fine - coarse).abs();
    if err < tol || depth >= max_depth {
        if depth >= max_depth {
            *achieved = achieved.max(err);
        }
        return fine;
    }
    adaptive_gl_rec(f, a, mid, tol / 2.0, depth + 1, max_depth, achieved)
        + adaptive_gl_rec(f, mid, b, tol / 2.0, depth + 1, max_depth, achieved)
}

/// Adaptive Gauss-Legendre integration to absolute tolerance `tol`.
pub fn adaptive_gl<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    if b == a {
        return Ok(0.0);
    }
    let mut achieved = 0.0;
    let v = adaptive_gl_rec(f, a, b, tol, 0, 12, &mut achieved);
    if achieved > 0.0 && achieved > 10.0 * tol {
        return Err(Error::Quadrature(format!(
            "max subdivisions reached on [{a}, {b}]; achieved tolerance {achieved:.3e} vs requested {tol:.3e}"
        )));
    }
    Ok(v)
}

/// Bisection refinement of a bracketed sign change; the bracket must satisfy
/// sign(f(a)) != sign(f(b)).
pub fn bisect<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All sign-change roots of `f` on [a, b] located by an `m`-point scan plus
/// bisection.
pub fn scan_roots<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, m: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..m - 1 {
        if vals[i].signum() * vals[i + 1].signum() < 0.0 {
            out.push(bisect(f, xs[i], xs[i + 1]));
        }
    }
    out
}

/// Least-squares slope of y against x (used for empirical order fits).
/// Returns (slope, intercept, rms residual).
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("x values coincide".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = (x
        .iter()
        .zip(y)
        .map(|(u, v)| {
            let d = v - (slope * u + icpt);
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, icpt, res))
}
