use phonon_boltzmann::dispersion::f_minus;
use phonon_boltzmann::kernel::{
    assemble_kernel, estimate_v0, fminus_roots, kernel_k, kernel_k_raw, v_of_k,
};
use phonon_boltzmann::Error;

/// Collision frequency fixtures from adaptive panel quadrature at tolerance
/// 1e-12, cross-checked against an independent integrator during
/// development.
const V_FIXTURES: [(f64, f64); 4] = [
    (0.5, 1.198702039970),
    (0.25, 0.696273107061),
    (0.1, 0.185460051387),
    (0.02, 0.013695324065),
];

#[test]
fn collision_frequency_fixtures() {
    for &(k, expected) in &V_FIXTURES {
        let v = v_of_k(k, 1e-11).unwrap();
        assert!(
            (v - expected).abs() < 1e-9,
            "V({k}) = {v}, expected {expected}"
        );
    }
}

#[test]
fn collision_frequency_is_even() {
    for &(k, _) in &V_FIXTURES {
        let plus = v_of_k(k, 1e-9).unwrap();
        let minus = v_of_k(-k, 1e-9).unwrap();
        assert!((plus - minus).abs() < 1e-12);
    }
}

#[test]
fn kernel_closed_form_points() {
    assert!((kernel_k(0.5, 0.5).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(kernel_k(0.3, 0.0).unwrap(), 0.0);
    assert_eq!(kernel_k(0.0, 0.7).unwrap(), 0.0);
}

#[test]
fn kernel_is_symmetric() {
    let samples = [0.07, 0.21, 0.33, 0.49, 0.68, 0.91];
    for &k in &samples {
        for &kp in &samples {
            let a = kernel_k_raw(k, kp);
            let b = kernel_k_raw(kp, k);
            assert!(
                (a - b).abs() <= 1e-13 * a.abs().max(1.0),
                "K({k},{kp}) = {a} vs K({kp},{k}) = {b}"
            );
        }
    }
}

#[test]
fn kernel_is_singular_across_the_resonance_curve() {
    let k = 0.3;
    let r = fminus_roots(k)
        .into_iter()
        .find(|&r| r > 0.01 && r < 0.99)
        .expect("the resonance curve crosses k = 0.3");
    let (lo, hi) = (r - 1e-4, r + 1e-4);
    let (inside, outside) = if f_minus(k, lo) > 0.0 { (lo, hi) } else { (hi, lo) };
    let diverging = kernel_k(k, inside).unwrap();
    let stable = kernel_k(k, outside).unwrap();
    assert!(
        diverging < -10.0,
        "F_- > 0 branch should blow up negatively near the curve, got {diverging}"
    );
    assert!(stable > 0.0 && stable < 10.0, "stable branch value {stable}");
}

#[test]
fn fminus_roots_lie_on_the_curve() {
    for &k in &[0.08, 0.2, 0.35, 0.47] {
        let roots = fminus_roots(k);
        assert!(!roots.is_empty(), "no roots found for k = {k}");
        for r in roots {
            assert!(
                f_minus(k, r).abs() < 1e-10,
                "F_-({k}, {r}) = {}",
                f_minus(k, r)
            );
        }
    }
}

#[test]
fn assembly_rejects_bad_grid_sizes() {
    assert!(matches!(assemble_kernel(8, 1e-8), Err(Error::Domain(_))));
    assert!(matches!(assemble_kernel(33, 1e-8), Err(Error::Domain(_))));
}

#[test]
fn assembled_table_pins() {
    let table = assemble_kernel(100, 1e-10).unwrap();
    assert!((table.v0 - 1.4172072051).abs() < 1e-8, "v0 = {}", table.v0);
    assert!((table.c1 - 1.1987183473).abs() < 1e-8, "c1 = {}", table.c1);
    assert!((table.c2 - 1.4025476958).abs() < 1e-8, "c2 = {}", table.c2);
    assert!(table.c1 < table.c2);
    assert!(table.c0_bound > 0.0);
    assert!(table.singular_cells > 0, "band cells must be cell-averaged");
    assert_eq!(table.band, 4);
}

#[test]
fn table_matrix_is_symmetric_with_zero_row_at_origin_cells() {
    let table = assemble_kernel(32, 1e-8).unwrap();
    let n = table.grid.n;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = table.entry(i, j);
            let b = table.entry(j, i);
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "entry ({i},{j}) asymmetric: {a} vs {b}"
            );
        }
    }
}

#[test]
fn envelope_profile_stays_between_measured_bounds() {
    let table = assemble_kernel(64, 1e-9).unwrap();
    for i in 0..table.grid.n {
        let p = table.profile(i);
        assert!(
            table.c1 - 1e-12 <= p && p <= table.c2 + 1e-12,
            "profile({i}) = {p} outside [{}, {}]",
            table.c1,
            table.c2
        );
    }
}

#[test]
fn v0_extrapolation_needs_a_resolved_tail() {
    let small = assemble_kernel(100, 1e-9).unwrap();
    assert!(matches!(estimate_v0(&small), Err(Error::Domain(_))));

    let table = assemble_kernel(200, 1e-10).unwrap();
    let est = estimate_v0(&table).unwrap();
    assert!(est.tail_monotone);
    assert!((est.v0 - 1.4170474016).abs() < 1e-8, "v0 = {}", est.v0);
    assert!(est.uncertainty > 0.0 && est.uncertainty < 1e-2);
}

#[test]
fn grid_refinement_contracts_v0_toward_the_profile_fit() {
    let coarse = assemble_kernel(100, 1e-9).unwrap().v0;
    let fine = assemble_kernel(200, 1e-9).unwrap().v0;
    let reference = 1.4170045376;
    assert!(
        (fine - reference).abs() < (coarse - reference).abs(),
        "refinement must contract: |{fine} - ref| vs |{coarse} - ref|"
    );
}
