//! Four-phonon collision operator reduced to a single k2-integral.
//!
//! On the resonant manifold the quartet is (k, k1, k2, k3) with
//! k1 = h(k, k2) the nontrivial root and k3 = k + k1 - k2; the delta
//! functions contribute the Jacobian 1/|omega'(k1) - omega'(k3)|. The
//! trivial root k1 = k2 makes the bracket vanish identically and is skipped
//! analytically. The bracket
//!   W1 W2 W3 + W W2 W3 - W W1 W3 - W W1 W2
//! is evaluated in the cancellation-free product form
//!   (w W)(w1 W1)(w2 W2)(w3 W3) (U + U1 - U2 - U3),  U = 1/W,
//! where the omega factors carry the interaction weight w w1 w2 w3 and turn
//! the linearization at W = T/omega into the kernel-form operator L up to
//! one overall constant.

use crate::dispersion::omega_prime_unit;
use crate::error::{Error, Result};
use crate::grid::{unit_view, WaveGrid};
use crate::kernel::fminus_roots;
use crate::linop::DiscreteOperator;
use crate::quad::{adaptive_gl, fit_line};
use std::f64::consts::PI;

/// Positive occupation numbers W(k_i) stored on the symmetric grid, with the
/// reciprocal U = 1/W in unit-view order for interpolation.
#[derive(Debug, Clone)]
pub struct PhononDensity {
    pub grid: WaveGrid,
    pub values: Vec<f64>,
    u_unit: Vec<f64>,
}

/// Parameters of the equilibrium family W = 1/(a + b omega).
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumParams {
    pub a: f64,
    pub b: f64,
}

impl PhononDensity {
    pub fn new(grid: WaveGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Domain(format!(
                "density length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(
                "occupation numbers must be strictly positive and finite".into(),
            ));
        }
        let perm = grid.sym_to_unit_perm();
        let u_unit: Vec<f64> = perm.iter().map(|&i| 1.0 / values[i]).collect();
        Ok(PhononDensity {
            grid,
            values,
            u_unit,
        })
    }

    pub fn equilibrium(grid: WaveGrid, params: EquilibriumParams) -> Result<Self> {
        if params.a < 0.0 || params.b <= 0.0 {
            return Err(Error::Domain(format!(
                "equilibrium needs a >= 0, b > 0; got a = {}, b = {}",
                params.a, params.b
            )));
        }
        let values: Vec<f64> = grid
            .nodes
            .iter()
            .map(|&k| 1.0 / (params.a + params.b * crate::dispersion::omega(k)))
            .collect();
        Self::new(grid, values)
    }

    /// U = 1/W at arbitrary k by 4-point Lagrange interpolation on the unit
    /// nodes (j + 1/2)/n, one-sided at the ends.
    pub fn u_at(&self, k: f64) -> f64 {
        let n = self.grid.n;
        let x = unit_view(k) * n as f64 - 0.5;
        let j0 = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = x - j0 as f64;
        let u = &self.u_unit[j0..j0 + 4];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        u[0] * l0 + u[1] * l1 + u[2] * l2 + u[3] * l3
    }
}

/// Nontrivial resonance root in the unit view, with the arcsin argument
/// clamped: it exceeds [-1, 1] only by round-off on the fold where the
/// Jacobian vanishes.
fn h_root(k: f64, k2: f64) -> f64 {
    let d = (k2 - k).abs();
    let arg = ((PI * d / 2.0).tan() * (PI * (k + k2) / 2.0).cos()).clamp(-1.0, 1.0);
    unit_view((k2 - k) / 2.0 + arg.asin() / PI)
}

fn sin_pi(k: f64) -> f64 {
    (PI * k).sin()
}

/// Quartet geometry shared by every reduced integrand.
fn quartet(k: f64, k2: f64) -> Option<(f64, f64, f64)> {
    let k1 = h_root(k, k2);
    let k3 = unit_view(k + k1 - k2);
    let den = (omega_prime_unit(k1) - omega_prime_unit(k3)).abs();
    if den < 1e-14 {
        return None;
    }
    Some((k1, k3, den))
}

fn c_integrand(w: &PhononDensity, k: f64, k2: f64) -> f64 {
    let Some((k1, k3, den)) = quartet(k, k2) else {
        return 0.0;
    };
    let (u0, u1, u2, u3) = (w.u_at(k), w.u_at(k1), w.u_at(k2), w.u_at(k3));
    let r0 = sin_pi(k) / u0;
    let r1 = sin_pi(k1) / u1;
    let r2 = sin_pi(k2) / u2;
    let r3 = sin_pi(k3) / u3;
    r0 * r1 * r2 * r3 * (u0 + u1 - u2 - u3) / den
}

fn q_integrand(f: &dyn Fn(f64) -> f64, k: f64, k2: f64) -> f64 {
    let Some((k1, k3, den)) = quartet(k, k2) else {
        return 0.0;
    };
    let (w0, w1, w3) = (sin_pi(k), sin_pi(k1), sin_pi(k3));
    let br = 2.0 * (w0 - w3) * (f(k1) * f(k2) - f(k) * f(k3))
        + (w0 + w1) * (f(k2) * f(k3) - f(k) * f(k1));
    w0 * br / den
}

/// Integrate g over [0, 1) with square-root substitutions at the F_- roots
/// (the fold of the resonance manifold) and a panel break at k2 = k.
fn panel_integrate<G: Fn(f64) -> f64>(g: G, k: f64, tol: f64) -> Result<f64> {
    let k = unit_view(k);
    let roots = fminus_roots(k);
    let mut breaks: Vec<(f64, bool)> = vec![(0.0, false), (k, false), (1.0, false)];
    breaks.extend(roots.iter().map(|&r| (r, true)));
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Coinciding break points merge; a root wins so the substitution stays.
    let mut merged: Vec<(f64, bool)> = Vec::new();
    for (x, is_root) in breaks {
        match merged.last_mut() {
            Some(last) if (x - last.0).abs() < 1e-13 => last.1 |= is_root,
            _ => merged.push((x, is_root)),
        }
    }
    let mut total = 0.0;
    for win in merged.windows(2) {
        let ((a, sa), (b, sb)) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        if sa && sb {
            let m = 0.5 * (a + b);
            total += adaptive_gl(&mut |u| 2.0 * u * g(a + u * u), 0.0, (m - a).sqrt(), tol / 2.0)?;
            total += adaptive_gl(&mut |u| 2.0 * u * g(b - u * u), 0.0, (b - m).sqrt(), tol / 2.0)?;
        } else if sa {
            total += adaptive_gl(&mut |u| 2.0 * u * g(a + u * u), 0.0, (b - a).sqrt(), tol)?;
        } else if sb {
            total += adaptive_gl(&mut |u| 2.0 * u * g(b - u * u), 0.0, (b - a).sqrt(), tol)?;
        } else {
            total += adaptive_gl(&mut |x| g(x), a, b, tol)?;
        }
    }
    Ok(total)
}

/// Collision operator C(W)(k) by adaptive quadrature over k2.
pub fn evaluate_c(w: &PhononDensity, k: f64, quad_tol: f64) -> Result<f64> {
    let k = unit_view(k);
    if k == 0.0 {
        return Err(Error::Domain("evaluate_C needs k != 0 mod 1".into()));
    }
    panel_integrate(|k2| c_integrand(w, k, k2), k, quad_tol)
}

/// Discrete moments (int C dk, int omega C dk); both tend to zero under
/// refinement because collisions conserve phonon number and energy.
pub fn conservation_check(w: &PhononDensity, quad_tol: f64) -> Result<(f64, f64)> {
    let wq = w.grid.weight;
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    for &k in &w.grid.nodes {
        let c = evaluate_c(w, k, quad_tol)?;
        m0 += c * wq;
        m1 += crate::dispersion::omega(k) * c * wq;
    }
    Ok((m0, m1))
}

/// Entropy production int W^{-1} C(W) dk >= 0, plus the scale
/// int W^{-1} |C| dk used for the relative nonnegativity check.
pub fn entropy_production(w: &PhononDensity, quad_tol: f64) -> Result<(f64, f64)> {
    let wq = w.grid.weight;
    let perm = w.grid.sym_to_unit_perm();
    let mut d = 0.0;
    let mut scale = 0.0;
    for (j, &i) in perm.iter().enumerate() {
        let k = (j as f64 + 0.5) / w.grid.n as f64;
        let c = evaluate_c(w, k, quad_tol)?;
        d += c / w.values[i] * wq;
        scale += c.abs() / w.values[i] * wq;
    }
    Ok((d, scale))
}

/// Single normalization constant between the reduced collision operator
/// linearized at W = T/omega and the kernel-form operator L. Calibrated once
/// and frozen in the test fixtures.
pub const CALIB_C: f64 = 0.159_141_88;

#[derive(Debug, Clone)]
pub struct LinearizationFit {
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Default probe rows for the linearization study: ten nodes spread over the
/// grid, matching the calibration fixture.
pub fn probe_rows(n: usize) -> Vec<usize> {
    (0..10).map(|i| n / 20 + i * n / 10).collect()
}

/// Consistency of the nonlinear operator with its linearization:
/// (1/(eps Wbar)) C(Wbar (1 + eps f)) -> c Tbar^2 L f as eps -> 0, measured
/// at the probe rows in the max norm. Wbar = Tbar/omega.
pub fn linearization_consistency(
    op: &DiscreteOperator,
    f_grid: &[f64],
    tbar: f64,
    eps_list: &[f64],
    quad_tol: f64,
) -> Result<LinearizationFit> {
    if eps_list.len() < 2 || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("eps_list must be strictly decreasing".into()));
    }
    let grid = &op.table.grid;
    let n = grid.n;
    let lf = op.apply_l(f_grid);
    let rows = probe_rows(n);
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let values: Vec<f64> = grid
            .nodes
            .iter()
            .zip(f_grid)
            .map(|(&k, &fi)| tbar / crate::dispersion::omega(k) * (1.0 + eps * fi))
            .collect();
        let wd = PhononDensity::new(grid.clone(), values)?;
        let mut worst = 0.0f64;
        for &i in &rows {
            let k = unit_view(grid.nodes[i]);
            // 1/(eps Wbar(k)) = omega(k)/(eps Tbar)
            let lhs = evaluate_c(&wd, k, quad_tol)? * sin_pi(k) / (eps * tbar);
            let rhs = CALIB_C * tbar * tbar * lf[i];
            worst = worst.max((lhs - rhs).abs());
        }
        errors.push(worst);
    }
    let lx: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (order, _, _) = fit_line(&lx, &ly)?;
    Ok(LinearizationFit {
        eps: eps_list.to_vec(),
        errors,
        order,
    })
}

/// Calibration fit for the normalization constant: least squares of the
/// reduced linearization against the kernel-form L f over the probe rows.
pub fn calibrate_c(op: &DiscreteOperator, quad_tol: f64) -> Result<f64> {
    let grid = &op.table.grid;
    let f_grid: Vec<f64> = grid.nodes.iter().map(|&k| (2.0 * PI * k).cos()).collect();
    let lf = op.apply_l(&f_grid);
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in &probe_rows(grid.n) {
        let k = unit_view(grid.nodes[i]);
        let f = |x: f64| (2.0 * PI * x).cos();
        let lr = panel_integrate(
            |k2| {
                let Some((k1, k3, d)) = quartet(k, k2) else {
                    return 0.0;
                };
                let br = sin_pi(k3) * f(k3) + sin_pi(k2) * f(k2)
                    - sin_pi(k1) * f(k1)
                    - sin_pi(k) * f(k);
                sin_pi(k) * br / d
            },
            k,
            quad_tol,
        )?;
        num += lr * lf[i];
        den += lf[i] * lf[i];
    }
    Ok(num / den)
}

/// Symmetric bilinear collision form by polarization of the quadratic part:
/// Q(f, g) = (Q2(f + g) - Q2(f - g))/4.
pub fn quadratic_q(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    k: f64,
    quad_tol: f64,
) -> Result<f64> {
    let k = unit_view(k);
    if k == 0.0 {
        return Err(Error::Domain("quadratic_Q needs k != 0 mod 1".into()));
    }
    let plus = panel_integrate(|k2| q_integrand(&|x| f(x) + g(x), k, k2), k, quad_tol)?;
    let minus = panel_integrate(|k2| q_integrand(&|x| f(x) - g(x), k, k2), k, quad_tol)?;
    Ok(0.25 * (plus - minus))
}
