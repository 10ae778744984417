use std::sync::OnceLock;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use phonon_boltzmann::kernel::assemble_kernel;
use phonon_boltzmann::linop::{DiscreteOperator, VdiagMode};

fn op() -> &'static DiscreteOperator {
    static OP: OnceLock<DiscreteOperator> = OnceLock::new();
    OP.get_or_init(|| {
        DiscreteOperator::new(assemble_kernel(100, 1e-10).unwrap(), VdiagMode::RowSum)
    })
}

fn random_state(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn collision_count_is_conserved_exactly() {
    let op = op();
    for seed in 0..5 {
        let f = random_state(seed, op.n());
        let lf = op.apply_l(&f);
        let total: f64 = lf.iter().map(|x| x * op.table.grid.weight).sum();
        let scale: f64 = lf.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(
            total.abs() <= 1e-14 * scale.max(1.0),
            "seed {seed}: <L f> = {total:e}"
        );
    }
}

#[test]
fn constants_are_in_the_kernel_of_l() {
    let op = op();
    let lf = op.apply_l(&vec![1.0; op.n()]);
    let worst = lf.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(worst <= 1e-12, "||L 1||_inf = {worst:e}");
}

#[test]
fn dirichlet_form_is_nonnegative() {
    let op = op();
    for seed in 0..5 {
        let f = random_state(100 + seed, op.n());
        let d = op.dirichlet_form(&f);
        assert!(d >= -1e-12, "seed {seed}: D(f) = {d:e}");
    }
}

#[test]
fn projection_is_idempotent() {
    let op = op();
    let f = random_state(7, op.n());
    let (coeffs, pf) = op.project_pi(&f).unwrap();
    let (coeffs2, ppf) = op.project_pi(&pf).unwrap();
    for i in 0..op.n() {
        assert!(
            (pf[i] - ppf[i]).abs() < 1e-12,
            "Pi^2 f differs from Pi f at {i}"
        );
    }
    assert!((coeffs.t_tilde - coeffs2.t_tilde).abs() < 1e-12);
    assert!((coeffs.s_tilde - coeffs2.s_tilde).abs() < 1e-12);
}

#[test]
fn projection_reproduces_constants() {
    let op = op();
    let (coeffs, pf) = op.project_pi(&vec![2.5; op.n()]).unwrap();
    assert!((coeffs.t_tilde - 2.5).abs() < 1e-12);
    assert!(coeffs.s_tilde.abs() < 1e-12);
    for value in &pf {
        assert!((value - 2.5).abs() < 1e-10);
    }
}

#[test]
fn conservation_moments_of_l() {
    let op = op();
    let f = random_state(11, op.n());
    // The plain count moment of L f vanishes exactly in row-sum mode; the
    // omega^{-1} moment is conserved only up to the discretization defect
    // measured by res_inv_omega (about 1e-2 at n = 100).
    let (m0, m1) = op.conservation_moments(&f);
    assert!(m0.abs() <= 1e-13, "m0 = {m0:e}");
    assert!(m1.abs() <= 0.05, "m1 = {m1:e}");
}

#[test]
fn decompose_state_round_trip() {
    let op = op();
    let eps: f64 = 0.1;
    let weights = op.weights();

    let g = random_state(13, op.n());
    let (_, pig) = op.project_pi(&g).unwrap();
    let h0: Vec<f64> = g.iter().zip(&pig).map(|(gi, pi)| gi - pi).collect();

    let (t0, s0) = (1.7, 0.4);
    let f: Vec<f64> = (0..op.n())
        .map(|i| {
            t0 + eps.powf(0.6) * s0 * weights.inv_omega[i] + eps.powf(0.8) * h0[i]
        })
        .collect();

    let (t, s, h) = op.decompose_state(&f, eps).unwrap();
    assert!((t - t0).abs() < 1e-10, "T = {t}");
    assert!((s - s0).abs() < 1e-10, "S = {s}");
    for i in 0..op.n() {
        assert!((h[i] - h0[i]).abs() < 1e-8, "h differs at node {i}");
    }

    let rebuilt: Vec<f64> = (0..op.n())
        .map(|i| t + eps.powf(0.6) * s * weights.inv_omega[i] + eps.powf(0.8) * h[i])
        .collect();
    for i in 0..op.n() {
        assert!((rebuilt[i] - f[i]).abs() < 1e-12);
    }
}

#[test]
fn spectral_report_pins() {
    let report = op().spectral_report().unwrap();
    let near_zero = report
        .eigenvalues
        .iter()
        .filter(|e| e.abs() < 1e-6 * report.max_abs)
        .count();
    assert_eq!(near_zero, 2);
    assert!((report.c0 - 0.47617437).abs() < 1e-7, "c0 = {}", report.c0);
    assert!(report.res_one <= 1e-12);
    assert!(
        (report.res_inv_omega - 1.288e-2).abs() < 2e-4,
        "res_inv_omega = {}",
        report.res_inv_omega
    );
}

#[test]
fn analytic_and_row_sum_diagonals_agree_at_discretization_level() {
    let table = assemble_kernel(64, 1e-9).unwrap();
    let analytic = DiscreteOperator::new(table.clone(), VdiagMode::Analytic);
    let row_sum = DiscreteOperator::new(table, VdiagMode::RowSum);
    let vmax = analytic.vdiag.iter().fold(0.0f64, |m, x| m.max(*x));
    let mut worst_abs = 0.0f64;
    let mut worst_rel_far = 0.0f64;
    for i in 0..analytic.n() {
        let a = analytic.vdiag[i];
        let b = row_sum.vdiag[i];
        worst_abs = worst_abs.max((a - b).abs() / vmax);
        // Relative agreement is only meaningful away from the V(k) ~ k^{5/3}
        // vanishing point, where the row sum is dominated by cell-average
        // error.
        if analytic.table.grid.nodes[i].abs() >= 0.1 {
            worst_rel_far = worst_rel_far.max((a - b).abs() / a);
        }
    }
    assert!(worst_abs < 2e-3, "absolute disagreement {worst_abs:e}");
    assert!(worst_rel_far < 1e-2, "relative disagreement {worst_rel_far:e}");
}
