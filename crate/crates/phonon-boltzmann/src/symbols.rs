//! Laplace-Fourier symbols of the two-moment closure and their epsilon -> 0
//! limits.
//!
//! The three symbols are
//!   a1 = eps^{-8/5} int (V/D - 1) V dk,
//!   a2 = eps^{-1}   int (V/D - 1) V/omega dk,
//!   a3 = eps^{-2/5} int (V/D - 1) V/omega^2 dk,
//! with D = eps^{8/5} p + V(k) + i eps omega'(k) xi, converging to
//! (-p - kappa1 |xi|^{8/5}, -kappa2 |xi|, -kappa3 |xi|^{2/5}). The epsilon
//! -> 0 behaviour is carried by the boundary layer k = O((eps |xi|)^{3/5}),
//! far below any fixed grid, so the integrals run over k directly with V
//! supplied by a profile interpolant refined near the origin.

use crate::error::{Error, Result};
use crate::kernel::{v_of_k, KernelTable};
use crate::quad::{adaptive_gl, gl32};
use num_complex::Complex64;
use std::f64::consts::PI;

/// kappa constants of the limiting fractional diffusion, derived from the
/// collision-frequency amplitude v0.
#[derive(Debug, Clone, Copy)]
pub struct KappaSet {
    pub v0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa_eff: f64,
}

/// (pi/2)/sin(pi/5): closed form for int_0^inf z^{+-3/5}/(1+z^2) dz, used as
/// an independent oracle for the quadrature route.
pub fn mellin_oracle() -> f64 {
    (PI / 2.0) / (PI / 5.0).sin()
}

/// The three z-integrals behind the kappa constants, each mapped to [0, 1]
/// by z -> 1/z on the algebraic tail (and z = y^5 for the fractional
/// powers): returns (I_plus, I_minus, I_0) for weights z^{3/5}, z^{-3/5}, 1.
pub fn kappa_integrals() -> Result<(f64, f64, f64)> {
    let tol = 1e-14;
    // z^{3/5}: head z in [0,1] maps to 5 y^7/(1+y^10), tail to 5 y/(1+y^10).
    let head_p = adaptive_gl(&mut |y: f64| 5.0 * y.powi(7) / (1.0 + y.powi(10)), 0.0, 1.0, tol)?;
    let tail_p = adaptive_gl(&mut |y: f64| 5.0 * y / (1.0 + y.powi(10)), 0.0, 1.0, tol)?;
    // z^{-3/5}: the same pair in the opposite order.
    let head_m = adaptive_gl(&mut |y: f64| 5.0 * y / (1.0 + y.powi(10)), 0.0, 1.0, tol)?;
    let tail_m = adaptive_gl(&mut |y: f64| 5.0 * y.powi(7) / (1.0 + y.powi(10)), 0.0, 1.0, tol)?;
    let half = adaptive_gl(&mut |z: f64| 1.0 / (1.0 + z * z), 0.0, 1.0, tol)?;
    Ok((head_p + tail_p, head_m + tail_m, 2.0 * half))
}

pub fn compute_kappas(v0: f64) -> Result<KappaSet> {
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("v0 must be positive, got {v0}")));
    }
    let (i_plus, i_minus, i_zero) = kappa_integrals()?;
    let kappa1 = 1.2 * (PI / v0).powf(0.6) * i_plus;
    let kappa2 = 1.2 * i_zero;
    let kappa3 = 1.2 * (v0 / PI).powf(0.6) * i_minus;
    let kappa_eff = kappa1 - kappa2 * kappa2 / kappa3;
    let set = KappaSet {
        v0,
        kappa1,
        kappa2,
        kappa3,
        kappa_eff,
    };
    if !(kappa1 > 0.0 && kappa2 > 0.0 && kappa3 > 0.0) || kappa2 * kappa2 >= kappa1 * kappa3 {
        return Err(Error::Domain(
            "kappa positivity/Cauchy-Schwarz structure violated".into(),
        ));
    }
    Ok(set)
}

/// Closed-form limits (-p - kappa1 |xi|^{8/5}, -kappa2 |xi|, -kappa3 |xi|^{2/5}).
pub fn limit_symbols(kappas: &KappaSet, p: f64, xi: f64) -> (f64, f64, f64) {
    let x = xi.abs();
    (
        -p - kappas.kappa1 * x.powf(1.6),
        -kappas.kappa2 * x,
        -kappas.kappa3 * x.powf(0.4),
    )
}

/// Collision-frequency profile V(k)/|sin(pi k)|^{5/3} as a spline in
/// u = k^{2/3}, quadratic in u below the innermost node. Resolves the
/// |k|^{5/3} vanishing without a fixed grid.
#[derive(Debug, Clone)]
pub struct VProfile {
    u: Vec<f64>,
    /// Spline coefficients per interval: value, first, second, third
    /// derivative in (u - u_i).
    coeffs: Vec<[f64; 4]>,
    model: [f64; 3],
    u_min: f64,
    pub v0: f64,
}

impl VProfile {
    /// Build from direct `v_of_k` evaluations: geometric nodes on
    /// [2e-4, 0.08), uniform on [0.08, 0.5].
    pub fn build(quad_tol: f64) -> Result<Self> {
        let m = 240;
        let mut ks = Vec::with_capacity(m);
        let (lo, hi) = (2e-4f64, 0.08f64);
        for i in 0..m / 2 {
            ks.push(lo * (hi / lo).powf(i as f64 / (m / 2) as f64));
        }
        for i in 0..m / 2 {
            ks.push(0.08 + (0.5 - 0.08) * i as f64 / (m / 2 - 1) as f64);
        }
        let prof: Result<Vec<f64>> = ks
            .iter()
            .map(|&k| Ok(v_of_k(k, quad_tol)? / (PI * k).sin().abs().powf(5.0 / 3.0)))
            .collect();
        Self::from_samples(&ks, &prof?)
    }

    /// Build from an assembled table: profile values at the positive grid
    /// nodes plus direct v_of_k refinement below the smallest node.
    pub fn from_table(table: &KernelTable) -> Result<Self> {
        let n = table.grid.n;
        let mut ks = Vec::new();
        let mut prof = Vec::new();
        let k_min = table.grid.nodes[n / 2];
        let lo = 2e-4f64;
        if k_min > lo {
            let extra = ((k_min / lo).ln() / 0.05).ceil() as usize;
            for i in 0..extra {
                let k = lo * (k_min / lo).powf(i as f64 / extra as f64);
                ks.push(k);
                prof.push(v_of_k(k, table.quad_tol)? / (PI * k).sin().abs().powf(5.0 / 3.0));
            }
        }
        for i in n / 2..n {
            ks.push(table.grid.nodes[i]);
            prof.push(table.profile(i));
        }
        Self::from_samples(&ks, &prof)
    }

    fn from_samples(ks: &[f64], prof: &[f64]) -> Result<Self> {
        let u: Vec<f64> = ks.iter().map(|k| k.powf(2.0 / 3.0)).collect();
        let coeffs = not_a_knot_spline(&u, prof)?;
        // Quadratic model prof ~ v0 + a u + b u^2 from the nodes k <= 2e-3.
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0f64; 3];
        let mut cnt = 0;
        for (i, &k) in ks.iter().enumerate() {
            if k <= 2e-3 {
                let row = [1.0, u[i], u[i] * u[i]];
                for r in 0..3 {
                    for c in 0..3 {
                        ata[r][c] += row[r] * row[c];
                    }
                    atb[r] += row[r] * prof[i];
                }
                cnt += 1;
            }
        }
        if cnt < 3 {
            return Err(Error::DegenerateFit(
                "too few profile nodes below 2e-3 for the origin model".into(),
            ));
        }
        let model = crate::kernel::solve3(ata, atb);
        Ok(VProfile {
            u_min: u[0],
            u,
            coeffs,
            model,
            v0: model[0],
        })
    }

    fn profile_at_u(&self, uu: f64) -> f64 {
        if uu < self.u_min {
            return self.model[0] + self.model[1] * uu + self.model[2] * uu * uu;
        }
        let m = self.u.len();
        let uu = uu.min(self.u[m - 1]);
        // Binary search for the interval.
        let mut lo = 0usize;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.u[mid] <= uu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = uu - self.u[lo];
        let c = &self.coeffs[lo];
        c[0] + d * (c[1] + d * (c[2] + d * c[3]))
    }

    /// V(k), even and 1-periodic.
    pub fn v_at(&self, k: f64) -> f64 {
        let mut kk = k.abs().rem_euclid(1.0);
        if kk > 0.5 {
            kk = 1.0 - kk;
        }
        if kk == 0.0 {
            return 0.0;
        }
        self.profile_at_u(kk.powf(2.0 / 3.0)) * (PI * kk).sin().abs().powf(5.0 / 3.0)
    }
}

/// Cubic spline with not-a-knot end conditions; returns per-interval
/// polynomial coefficients.
fn not_a_knot_spline(x: &[f64], y: &[f64]) -> Result<Vec<[f64; 4]>> {
    let m = x.len();
    if m < 4 {
        return Err(Error::DegenerateFit("spline needs at least 4 nodes".into()));
    }
    // Solve for second derivatives s[0..m]: standard continuity rows plus
    // third-derivative continuity at the first and last interior nodes.
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut b = nalgebra::DVector::<f64>::zeros(m);
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    for i in 1..m - 1 {
        a[(i, i - 1)] = h[i - 1];
        a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        a[(i, i + 1)] = h[i];
        b[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    a[(0, 0)] = h[1];
    a[(0, 1)] = -(h[0] + h[1]);
    a[(0, 2)] = h[0];
    a[(m - 1, m - 3)] = h[m - 2];
    a[(m - 1, m - 2)] = -(h[m - 3] + h[m - 2]);
    a[(m - 1, m - 1)] = h[m - 3];
    let s = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::LinearSolve("singular spline system".into()))?;
    let mut coeffs = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let c0 = y[i];
        let c2 = s[i] / 2.0;
        let c3 = (s[i + 1] - s[i]) / (6.0 * h[i]);
        let c1 = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * s[i] + s[i + 1]) / 6.0;
        coeffs.push([c0, c1, c2, c3]);
    }
    Ok(coeffs)
}

/// One evaluated symbol sample.
#[derive(Debug, Clone, Copy)]
pub struct SymbolSample {
    pub eps: f64,
    pub p: f64,
    pub xi: f64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
    pub f1: Option<Complex64>,
    pub f2: Option<Complex64>,
}

/// Geometric panel break points on [lo, hi] spanning eight octaves either
/// side of `center` (the boundary-layer width k*).
fn geom_breaks(lo: f64, hi: f64, center: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let x = center.clamp(4.0 * lo, hi / 4.0);
    for m in -8..=8 {
        let y = x * 2.0f64.powi(m);
        if y > lo && y < hi {
            pts.push(y);
        }
    }
    let mut y = x * 2.0f64.powi(-8);
    while y > 4.0 * lo {
        y /= 4.0;
        pts.push(y);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Fixed 32-point Gauss-Legendre nodes over the geometric panels.
fn panel_nodes(breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let rule = gl32();
    let mut k = Vec::with_capacity(32 * (breaks.len() - 1));
    let mut w = Vec::with_capacity(32 * (breaks.len() - 1));
    for win in breaks.windows(2) {
        let mid = 0.5 * (win[0] + win[1]);
        let half = 0.5 * (win[1] - win[0]);
        for (xi, wi) in rule.0.iter().zip(rule.1.iter()) {
            k.push(mid + half * xi);
            w.push(half * wi);
        }
    }
    (k, w)
}

/// Core complex-p evaluation of (a1, a2, a3) and optionally (F1, F2) for a
/// k-independent initial amplitude `f0`. The integrand is summed over +-k
/// explicitly, so the odd part cancels numerically rather than by a folded
/// closed form.
pub fn symbols_complex(
    profile: &VProfile,
    eps: f64,
    p: Complex64,
    xi: f64,
    f0: Option<Complex64>,
) -> SymbolSample {
    let n = Complex64::from(eps.powf(1.6)) * p;
    let bc = eps * PI * xi;
    let kstar = ((n.norm().max((bc).abs())) / (profile.v0 * PI.powf(5.0 / 3.0))).powf(0.6);
    let sides = |v: f64, b: f64| -> (Complex64, Complex64) {
        // (V/D - 1) summed over +-k and (V/D) summed over +-k.
        let dp = n + v + Complex64::new(0.0, b);
        let dm = n + v - Complex64::new(0.0, b);
        let c = v / dp - 1.0 + v / dm - 1.0;
        let f = v / dp + v / dm;
        (c, f)
    };

    let (kn, kw) = panel_nodes(&geom_breaks(1e-12, 0.5, kstar));
    let mut a1 = Complex64::default();
    let mut a2 = Complex64::default();
    let mut f1 = Complex64::default();
    for (&k, &w) in kn.iter().zip(kw.iter()) {
        let v = profile.v_at(k);
        let b = bc * (PI * k).cos();
        let s = (PI * k).sin();
        let (c, f) = sides(v, b);
        a1 += w * c * v;
        a2 += w * c * v / s;
        f1 += w * f;
    }

    let (un, uw) = panel_nodes(&geom_breaks(1e-7, 0.5f64.powf(1.0 / 3.0), kstar.max(1e-18).powf(1.0 / 3.0)));
    let mut a3 = Complex64::default();
    let mut f2 = Complex64::default();
    for (&u, &w) in un.iter().zip(uw.iter()) {
        let k = u * u * u;
        let v = profile.v_at(k);
        let b = bc * (PI * k).cos();
        let s = (PI * k).sin();
        let (c, f) = sides(v, b);
        let jac = 3.0 * u * u * w;
        a3 += jac * c * v / (s * s);
        f2 += jac * f / s;
    }

    SymbolSample {
        eps,
        p: p.re,
        xi,
        a1: a1 / eps.powf(1.6),
        a2: a2 / eps,
        a3: a3 / eps.powf(0.4),
        f1: f0.map(|t| f1 * t),
        f2: f0.map(|t| f2 * t * eps.powf(0.6)),
    }
}

fn check_real_pos(eps: f64, p: f64) -> Result<()> {
    if !(eps > 0.0 && p > 0.0) {
        return Err(Error::Domain(format!(
            "symbols need eps > 0 and p > 0; got eps = {eps}, p = {p}"
        )));
    }
    Ok(())
}

pub fn a1_eps(profile: &VProfile, eps: f64, p: f64, xi: f64) -> Result<Complex64> {
    check_real_pos(eps, p)?;
    Ok(symbols_complex(profile, eps, Complex64::from(p), xi, None).a1)
}

pub fn a2_eps(profile: &VProfile, eps: f64, p: f64, xi: f64) -> Result<Complex64> {
    check_real_pos(eps, p)?;
    Ok(symbols_complex(profile, eps, Complex64::from(p), xi, None).a2)
}

pub fn a3_eps(profile: &VProfile, eps: f64, p: f64, xi: f64) -> Result<Complex64> {
    check_real_pos(eps, p)?;
    Ok(symbols_complex(profile, eps, Complex64::from(p), xi, None).a3)
}

/// F1, F2 for initial data given on the grid (interpolated off-grid); the
/// common case of k-independent data short-circuits the interpolation.
pub fn f_initial(
    profile: &VProfile,
    f0_grid: &[Complex64],
    eps: f64,
    p: f64,
    xi: f64,
) -> Result<(Complex64, Complex64)> {
    check_real_pos(eps, p)?;
    let constant = f0_grid
        .windows(2)
        .all(|w| (w[0] - w[1]).norm() <= 1e-15 * (w[0].norm() + 1.0));
    if constant {
        let s = symbols_complex(
            profile,
            eps,
            Complex64::from(p),
            xi,
            Some(f0_grid.first().copied().unwrap_or_default()),
        );
        return Ok((s.f1.unwrap(), s.f2.unwrap()));
    }
    // General grid data: 4-point Lagrange interpolation in the unit view.
    let n = f0_grid.len();
    let half = n / 2;
    let unit: Vec<Complex64> = (0..n).map(|j| f0_grid[(j + half) % n]).collect();
    let interp = move |k: f64| -> Complex64 {
        let x = crate::grid::unit_view(k) * n as f64 - 0.5;
        let j0 = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = x - j0 as f64;
        let l = [
            -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
            t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0,
            t * (t - 1.0) * (t - 2.0) / 6.0,
        ];
        (0..4).map(|i| unit[j0 + i] * l[i]).sum()
    };
    let nn = Complex64::from(eps.powf(1.6) * p);
    let bc = eps * PI * xi;
    let kstar = ((nn.norm().max(bc.abs())) / (profile.v0 * PI.powf(5.0 / 3.0))).powf(0.6);
    let (kn, kw) = panel_nodes(&geom_breaks(1e-12, 0.5, kstar));
    let mut f1 = Complex64::default();
    for (&k, &w) in kn.iter().zip(kw.iter()) {
        let v = profile.v_at(k);
        let b = bc * (PI * k).cos();
        let dp = nn + v + Complex64::new(0.0, b);
        let dm = nn + v - Complex64::new(0.0, b);
        f1 += w * (v / dp * interp(k) + v / dm * interp(-k));
    }
    let (un, uw) = panel_nodes(&geom_breaks(1e-7, 0.5f64.powf(1.0 / 3.0), kstar.max(1e-18).powf(1.0 / 3.0)));
    let mut f2 = Complex64::default();
    for (&u, &w) in un.iter().zip(uw.iter()) {
        let k = u * u * u;
        let v = profile.v_at(k);
        let b = bc * (PI * k).cos();
        let s = (PI * k).sin();
        let dp = nn + v + Complex64::new(0.0, b);
        let dm = nn + v - Complex64::new(0.0, b);
        f2 += 3.0 * u * u * w * (v / dp * interp(k) + v / dm * interp(-k)) / s;
    }
    Ok((f1, f2 * eps.powf(0.6)))
}

/// Worst-case margin of the a3 lower bound |a3| >= c (eps^{6/25} p^{2/5} + |xi|^{2/5})
/// over a geometric (p, xi) lattice in [1e-3, kmax]^2.
#[derive(Debug, Clone, Copy)]
pub struct MarginScan {
    pub margin: f64,
    pub at_p: f64,
    pub at_xi: f64,
}

pub fn a3_lower_bound_check(profile: &VProfile, eps: f64, kmax: f64) -> Result<MarginScan> {
    if eps * kmax > 1.0 {
        return Err(Error::Domain(format!(
            "lower-bound scan needs eps*K <= 1, got {}",
            eps * kmax
        )));
    }
    let m = 13;
    let lat: Vec<f64> = (0..m)
        .map(|i| 1e-3 * (kmax / 1e-3).powf(i as f64 / (m - 1) as f64))
        .collect();
    let mut best = MarginScan {
        margin: f64::INFINITY,
        at_p: 0.0,
        at_xi: 0.0,
    };
    for &p in &lat {
        for &xi in &lat {
            let a3 = a3_eps(profile, eps, p, xi)?;
            let denom = eps.powf(0.24) * p.powf(0.4) + xi.abs().powf(0.4);
            let r = a3.norm() / denom;
            if r < best.margin {
                best = MarginScan {
                    margin: r,
                    at_p: p,
                    at_xi: xi,
                };
            }
        }
    }
    Ok(best)
}

/// Empirical convergence rates of the three symbols toward their limits.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub eps: Vec<f64>,
    /// errors[i][j] = |a_{j+1}(eps_i) - limit_j|
    pub errors: Vec<[f64; 3]>,
    pub rates: [f64; 3],
    pub residuals: [f64; 3],
    pub strictly_decreasing: [bool; 3],
}

pub fn convergence_study(
    profile: &VProfile,
    kappas: &KappaSet,
    p: f64,
    xi: f64,
    eps_list: &[f64],
) -> Result<ConvergenceStudy> {
    if eps_list.len() < 3 || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "eps_list must be strictly decreasing with at least 3 entries".into(),
        ));
    }
    let (l1, l2, l3) = limit_symbols(kappas, p, xi);
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let s = symbols_complex(profile, eps, Complex64::from(p), xi, None);
        errors.push([
            (s.a1 - l1).norm(),
            (s.a2 - l2).norm(),
            (s.a3 - l3).norm(),
        ]);
    }
    let lx: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let mut rates = [0.0; 3];
    let mut residuals = [0.0; 3];
    let mut dec = [true; 3];
    for j in 0..3 {
        let ly: Vec<f64> = errors.iter().map(|e| e[j].max(1e-300).ln()).collect();
        let (slope, _, res) = crate::quad::fit_line(&lx, &ly)?;
        rates[j] = slope;
        residuals[j] = res;
        for w in errors.windows(2) {
            if w[1][j] >= w[0][j] {
                dec[j] = false;
            }
        }
    }
    Ok(ConvergenceStudy {
        eps: eps_list.to_vec(),
        errors,
        rates,
        residuals,
        strictly_decreasing: dec,
    })
}

/// Closed-moment prediction of the Laplace-domain temperature:
/// T_hat(p) = -(a3 F1 - a2 F2)/(a1 a3 - a2^2) with the remainder terms
/// dropped. Serves as the continuum-side oracle for the simulation.
pub fn t_symbol(profile: &VProfile, eps: f64, p: Complex64, xi: f64, t0: Complex64) -> Complex64 {
    let s = symbols_complex(profile, eps, p, xi, Some(t0));
    let det = s.a1 * s.a3 - s.a2 * s.a2;
    -(s.a3 * s.f1.unwrap() - s.a2 * s.f2.unwrap()) / det
}

/// Abate-Whitt Euler inversion of a Laplace transform along a vertical line;
/// valid here because the symbol's branch points sit near the imaginary
/// axis. Round-off in f is amplified by 10^{em/3}, so em = 16 is the sweet
/// spot in double precision (~1e-12 for exact transforms); use em <= 14 when
/// f itself carries quadrature error.
pub fn euler_ilt<F: FnMut(Complex64) -> Complex64>(mut f: F, t: f64, em: usize) -> f64 {
    let mut xi = vec![0.0f64; 2 * em + 1];
    xi[0] = 0.5;
    for v in xi.iter_mut().take(em + 1).skip(1) {
        *v = 1.0;
    }
    xi[2 * em] = 2.0f64.powi(-(em as i32));
    // Binomial recursion for the averaging weights.
    let mut binom = vec![0.0f64; em + 1];
    binom[0] = 1.0;
    for i in 1..=em {
        for j in (1..=i).rev() {
            binom[j] += binom[j - 1];
        }
    }
    for j in 1..em {
        xi[2 * em - j] = xi[2 * em - j + 1] + 2.0f64.powi(-(em as i32)) * binom[j];
    }
    let base = em as f64 * 10.0f64.ln() / 3.0;
    let mut acc = 0.0;
    for (k, &xik) in xi.iter().enumerate() {
        let beta = Complex64::new(base, PI * k as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * xik * f(beta / t).re;
    }
    10.0f64.powf(em as f64 / 3.0) / t * acc
}
