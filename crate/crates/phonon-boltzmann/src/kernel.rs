//! Closed-form collision kernel K(k, k'), the collision frequency
//! V(k) = int K(k', k) dk', and assembly of the dense kernel table.
//!
//! K carries an inverse-square-root singularity along the curve F_- = 0.
//! Pointwise values use algebraically stable branch forms; integrals split
//! panels at the F_- roots and substitute u = sqrt(distance) so every panel
//! integrand is smooth. Matrix entries whose cell is crossed by the singular
//! curve are replaced by exact 2-D cell averages, which keeps row sums
//! consistent with the analytic V and the discrete spectrum clean.

use crate::dispersion::{f_minus, f_plus};
use crate::error::{Error, Result};
use crate::grid::{unit_view, WaveGrid};
use crate::quad::{adaptive_gl, bisect, gl16, gl_panel, scan_roots};

/// Kernel value with the measure-zero singular set reported as an error.
pub fn kernel_k(k: f64, kp: f64) -> Result<f64> {
    let k = unit_view(k);
    let kp = unit_view(kp);
    if f_minus(k, kp) == 0.0 {
        return Err(Error::SingularCurve(k, kp));
    }
    Ok(kernel_k_raw(k, kp))
}

/// Branch-stable kernel evaluation; arguments must already be in [0, 1).
///
/// With s = sin(pi k), s' = sin(pi k') and F+- the resonance discriminants
/// (F+ - F- = 8 s s'):
///   F- > 0:  K = -32 s^2 s'^2 / (sqrt(F+) sqrt(F-) (sqrt(F+) + sqrt(F-)))
///   F- <= 0: K = 4 s s' / sqrt(F+)
/// The first form evaluates 2/sqrt(F+) - 4/sqrt(F-) without cancellation,
/// which is what keeps the k -> 0 quadratic vanishing exact in floating
/// point.
pub fn kernel_k_raw(k: f64, kp: f64) -> f64 {
    let s = (std::f64::consts::PI * k).sin();
    let sp = (std::f64::consts::PI * kp).sin();
    let fp = f_plus(k, kp);
    let fm = f_minus(k, kp);
    if fp <= 0.0 {
        return 0.0;
    }
    let rp = fp.sqrt();
    if fm > 0.0 {
        let rm = fm.sqrt();
        -32.0 * (s * sp) * (s * sp) / (rp * rm * (rp + rm))
    } else {
        4.0 * s * sp / rp
    }
}

/// Roots of F_-(., k) on [0, 1] by sign-change scan plus bisection.
pub fn fminus_roots(k: f64) -> Vec<f64> {
    let k = unit_view(k);
    let mut f = |t: f64| f_minus(t, k);
    scan_roots(&mut f, 0.0, 1.0, 2001)
}

/// Collision frequency V(k) by adaptive quadrature of the kernel row, with
/// square-root substitutions on the panels adjacent to the F_- roots.
/// Absolute error target `quad_tol`.
pub fn v_of_k(k: f64, quad_tol: f64) -> Result<f64> {
    let k = unit_view(k);
    if k == 0.0 {
        return Ok(0.0);
    }
    let roots = fminus_roots(k);
    let mut edges = vec![0.0];
    edges.extend(roots.iter().copied());
    edges.push(1.0);
    let is_root = |x: f64| roots.iter().any(|&r| (x - r).abs() < 1e-13);
    let f = |kp: f64| kernel_k_raw(kp, k);
    let mut total = 0.0;
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        let mid = 0.5 * (a + b);
        // The substitution is only needed on the F_- > 0 side, where the
        // 1/sqrt(F_-) branch blows up toward the root.
        let side_sing = f_minus(mid, k) > 0.0;
        let sing_a = is_root(a) && side_sing;
        let sing_b = is_root(b) && side_sing;
        if sing_a && sing_b {
            let m = mid;
            total += adaptive_gl(&mut |u| 2.0 * u * f(a + u * u), 0.0, (m - a).sqrt(), quad_tol)?;
            total += adaptive_gl(&mut |u| 2.0 * u * f(b - u * u), 0.0, (b - m).sqrt(), quad_tol)?;
        } else if sing_a {
            total += adaptive_gl(&mut |u| 2.0 * u * f(a + u * u), 0.0, (b - a).sqrt(), quad_tol)?;
        } else if sing_b {
            total += adaptive_gl(&mut |u| 2.0 * u * f(b - u * u), 0.0, (b - a).sqrt(), quad_tol)?;
        } else {
            total += adaptive_gl(&mut |kp| f(kp), a, b, quad_tol)?;
        }
    }
    Ok(total)
}

/// Inner 1-D integral of K(k, . mod 1) over [a, b] (which may leave [0, 1]),
/// with fixed 16-point panels after root splitting.
fn inner_int(k: f64, a: f64, b: f64) -> f64 {
    let rule = gl16();
    let ff = |t: f64| kernel_k_raw(k, unit_view(t));
    let m = 33;
    let xs: Vec<f64> = (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect();
    let g = |t: f64| f_minus(k, unit_view(t));
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut roots = Vec::new();
    for i in 0..m - 1 {
        if vals[i].signum() * vals[i + 1].signum() < 0.0 {
            roots.push(bisect(&mut |t| g(t), xs[i], xs[i + 1]));
        }
    }
    let mut pts = vec![a];
    pts.extend(roots.iter().copied());
    pts.push(b);
    let is_root = |x: f64| roots.iter().any(|&r| (x - r).abs() < 1e-13);
    let mut tot = 0.0;
    for win in pts.windows(2) {
        let (p, q) = (win[0], win[1]);
        let (lsing, rsing) = (is_root(p), is_root(q));
        if lsing && rsing {
            let mp = 0.5 * (p + q);
            tot += gl_panel(&mut |u| 2.0 * u * ff(p + u * u), 0.0, (mp - p).sqrt(), rule);
            tot += gl_panel(&mut |u| 2.0 * u * ff(q - u * u), 0.0, (q - mp).sqrt(), rule);
        } else if lsing {
            tot += gl_panel(&mut |u| 2.0 * u * ff(p + u * u), 0.0, (q - p).sqrt(), rule);
        } else if rsing {
            tot += gl_panel(&mut |u| 2.0 * u * ff(q - u * u), 0.0, (q - p).sqrt(), rule);
        } else {
            tot += gl_panel(&mut |t| ff(t), p, q, rule);
        }
    }
    tot
}

/// Exact 2-D average of K over the grid cell centred at (ki, kj), splitting
/// the outer variable where F_-(., edge) changes sign and substituting
/// u = sqrt(distance) at those splits.
fn cell_avg2(ki: f64, kj: f64, h: f64) -> f64 {
    let rule = gl16();
    let (p0, q0) = (ki - h / 2.0, ki + h / 2.0);
    let (a, b) = (kj - h / 2.0, kj + h / 2.0);
    let au = unit_view(a);
    let bu = {
        let t = unit_view(b);
        if t <= 1e-14 {
            1.0
        } else {
            t
        }
    };
    let edge_lo = if au > 0.0 { au } else { 1e-15 };
    let edge_hi = if bu < 1.0 { bu } else { 1.0 - 1e-15 };
    let mut splits: Vec<f64> = Vec::new();
    for y in [edge_lo, edge_hi] {
        let mut g = |t: f64| f_minus(unit_view(t), y);
        splits.extend(scan_roots(&mut g, p0, q0, 17));
    }
    splits.retain(|&s| s > p0 + 1e-14 && s < q0 - 1e-14);
    splits.sort_by(f64::total_cmp);
    splits.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut pts = vec![(p0, false)];
    pts.extend(splits.iter().map(|&s| (s, true)));
    pts.push((q0, false));
    let ii = |k: f64| inner_int(unit_view(k), a, b);
    let mut tot = 0.0;
    for win in pts.windows(2) {
        let ((p, ls), (q, rs)) = (win[0], win[1]);
        if ls && rs {
            let mp = 0.5 * (p + q);
            tot += gl_panel(&mut |u| 2.0 * u * ii(p + u * u), 0.0, (mp - p).sqrt(), rule);
            tot += gl_panel(&mut |u| 2.0 * u * ii(q - u * u), 0.0, (q - mp).sqrt(), rule);
        } else if ls {
            tot += gl_panel(&mut |u| 2.0 * u * ii(p + u * u), 0.0, (q - p).sqrt(), rule);
        } else if rs {
            tot += gl_panel(&mut |u| 2.0 * u * ii(q - u * u), 0.0, (q - p).sqrt(), rule);
        } else {
            tot += gl_panel(&mut |t| ii(t), p, q, rule);
        }
    }
    tot / (h * h)
}

/// Estimate of v0 = lim_{k->0} V(k)/|sin(pi k)|^{5/3} from profile values at
/// the smallest grid nodes.
#[derive(Debug, Clone, Copy)]
pub struct V0Estimate {
    pub v0: f64,
    pub uncertainty: f64,
    /// False when the profile tail is not monotone; the estimate is then the
    /// last extrapolant and should be treated with care.
    pub tail_monotone: bool,
}

/// Dense kernel table on a midpoint grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub grid: WaveGrid,
    /// Row-major n x n matrix of K(k_i, k_j), cell-averaged on the cells
    /// crossed by the singular curve.
    pub k: Vec<f64>,
    /// Analytic collision frequency V(k_i) from `v_of_k`.
    pub v: Vec<f64>,
    /// V(k_i) |k_i|^{-5/3}; bounded, tends to v0 pi^{5/3} at 0.
    pub wprof: Vec<f64>,
    pub v0: f64,
    /// Measured min and max of V(k)/|sin(pi k)|^{5/3} over the grid.
    pub c1: f64,
    pub c2: f64,
    /// Measured bound max_i Wprof_i.
    pub c0_bound: f64,
    pub quad_tol: f64,
    /// Cells replaced by 2-D averages during assembly.
    pub singular_cells: usize,
    pub band: usize,
}

impl KernelTable {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.grid.n + j]
    }

    /// Profile value V(k_i)/|sin(pi k_i)|^{5/3} at node i.
    pub fn profile(&self, i: usize) -> f64 {
        let s = (std::f64::consts::PI * self.grid.nodes[i]).sin().abs();
        self.v[i] / s.powf(5.0 / 3.0)
    }

    /// Row-sum diagonal: V_i = sum_j K(k_j, k_i) w. Symmetry of K makes the
    /// row and column sums interchangeable.
    pub fn row_sum_v(&self) -> Vec<f64> {
        let n = self.grid.n;
        (0..n)
            .map(|i| {
                (0..n).map(|j| self.k[i * n + j]).sum::<f64>() * self.grid.weight
            })
            .collect()
    }
}

/// Assemble the kernel table: closed-form entries everywhere, 2-D cell
/// averages in a band around the singular curve, analytic V by `v_of_k`.
pub fn assemble_kernel(n: usize, quad_tol: f64) -> Result<KernelTable> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::Domain(format!(
            "grid size must be even and >= 16, got {n}"
        )));
    }
    let grid = WaveGrid::new(n);
    let h = grid.weight;
    let band = (0.8 * (n as f64).powf(1.0 / 3.0)).round().max(2.0) as usize;

    // Sign-change detection on a 5x5 in-cell lattice.
    let offsets: Vec<f64> = (0..5).map(|i| (-0.5 + 0.25 * i as f64) * h * 0.999).collect();
    let nodes_u: Vec<f64> = grid.nodes.iter().map(|&k| unit_view(k)).collect();
    let mut cross = vec![false; n * n];
    let sgn0: Vec<f64> = {
        let t0 = offsets[0];
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(
                    f_minus(unit_view(nodes_u[i] + t0), unit_view(nodes_u[j] + t0)).signum(),
                );
            }
        }
        v
    };
    for &ta in &offsets {
        for &tb in &offsets {
            for i in 0..n {
                let ka = unit_view(nodes_u[i] + ta);
                for j in 0..n {
                    if !cross[i * n + j] {
                        let s = f_minus(ka, unit_view(nodes_u[j] + tb)).signum();
                        if s != sgn0[i * n + j] {
                            cross[i * n + j] = true;
                        }
                    }
                }
            }
        }
    }
    // Dilate the mask `band` steps in the 4-neighbour topology.
    let mut mask = cross;
    for _ in 0..band {
        let prev = mask.clone();
        for i in 0..n {
            for j in 0..n {
                if prev[i * n + j] {
                    if i > 0 {
                        mask[(i - 1) * n + j] = true;
                    }
                    if i + 1 < n {
                        mask[(i + 1) * n + j] = true;
                    }
                    if j > 0 {
                        mask[i * n + j - 1] = true;
                    }
                    if j + 1 < n {
                        mask[i * n + j + 1] = true;
                    }
                }
            }
        }
    }

    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = kernel_k_raw(nodes_u[i], nodes_u[j]);
        }
    }
    let mut singular_cells = 0usize;
    for i in 0..n {
        for j in i..n {
            if mask[i * n + j] {
                singular_cells += if i == j { 1 } else { 2 };
                let v = cell_avg2(nodes_u[i], grid.nodes[j], h);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
    }

    let mut v = Vec::with_capacity(n);
    for (i, &node) in grid.nodes.iter().enumerate() {
        v.push(v_of_k(node, quad_tol).map_err(|e| {
            Error::Quadrature(format!("V quadrature failed at row {i} (k = {node}): {e}"))
        })?);
    }

    let wprof: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&v)
        .map(|(&kk, &vv)| vv / kk.abs().powf(5.0 / 3.0))
        .collect();
    let prof: Vec<f64> = (0..n)
        .map(|i| {
            let s = (std::f64::consts::PI * grid.nodes[i]).sin().abs();
            v[i] / s.powf(5.0 / 3.0)
        })
        .collect();
    let c1 = prof.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = prof.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c0_bound = wprof.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut table = KernelTable {
        grid,
        k,
        v,
        wprof,
        v0: 0.0,
        c1,
        c2,
        c0_bound,
        quad_tol,
        singular_cells,
        band,
    };
    table.v0 = fit_v0(&table, 8).v0;
    Ok(table)
}

/// Quadratic-in-k^{2/3} extrapolation of the profile from the `m` smallest
/// positive nodes. The profile expands as v0 + a k^{2/3} + b k^{4/3} near 0.
fn fit_v0(table: &KernelTable, m: usize) -> V0Estimate {
    let n = table.grid.n;
    // Smallest positive nodes are (j + 1/2)/n, j = 0..m, i.e. symmetric
    // indices n/2, n/2+1, ...
    let idx: Vec<usize> = (0..m).map(|j| n / 2 + j).collect();
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for &i in &idx {
        let p = table.profile(i);
        if p > last + 1e-12 {
            monotone = false;
        }
        last = p;
    }
    let fit = |cnt: usize| -> f64 {
        // Normal equations for prof ~ c0 + c1 u + c2 u^2, u = k^{2/3}.
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0f64; 3];
        for &i in idx.iter().take(cnt) {
            let u = table.grid.nodes[i].abs().powf(2.0 / 3.0);
            let row = [1.0, u, u * u];
            let y = table.profile(i);
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += row[r] * row[c];
                }
                atb[r] += row[r] * y;
            }
        }
        solve3(ata, atb)[0]
    };
    let e7 = fit(7.min(m));
    let e8 = fit(m);
    V0Estimate {
        v0: e8,
        uncertainty: (e8 - e7).abs(),
        tail_monotone: monotone,
    }
}

/// Extrapolated v0 with an uncertainty estimate; requires n >= 200 so the
/// smallest nodes sit inside the asymptotic regime.
pub fn estimate_v0(table: &KernelTable) -> Result<V0Estimate> {
    if table.grid.n < 200 {
        return Err(Error::Domain(format!(
            "estimate_v0 needs n >= 200, got {}",
            table.grid.n
        )));
    }
    Ok(fit_v0(table, 8))
}

pub(crate) fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for r in col + 1..3 {
            let f = a[r][col] / d;
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for c in r + 1..3 {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x
}
