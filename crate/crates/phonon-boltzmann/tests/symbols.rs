use std::sync::OnceLock;

use approx::assert_relative_eq;
use num_complex::Complex64;

use phonon_boltzmann::kernel::assemble_kernel;
use phonon_boltzmann::symbols::{
    a1_eps, a2_eps, a3_eps, a3_lower_bound_check, compute_kappas, convergence_study,
    euler_ilt, kappa_integrals, limit_symbols, mellin_oracle, symbols_complex, t_symbol,
    KappaSet, VProfile,
};

const V0_REF: f64 = 1.4170045376;

fn profile() -> &'static VProfile {
    static PROFILE: OnceLock<VProfile> = OnceLock::new();
    PROFILE.get_or_init(|| VProfile::build(1e-11).unwrap())
}

fn kappas() -> &'static KappaSet {
    static KAPPAS: OnceLock<KappaSet> = OnceLock::new();
    KAPPAS.get_or_init(|| compute_kappas(V0_REF).unwrap())
}

#[test]
fn mellin_closed_form() {
    let oracle = mellin_oracle();
    assert_relative_eq!(
        oracle,
        std::f64::consts::FRAC_PI_2 / (std::f64::consts::PI / 5.0).sin(),
        max_relative = 1e-15
    );
    assert!((oracle - 2.672_398_330_288_987).abs() < 1e-12);
}

#[test]
fn kappa_integrals_reduce_to_mellin_values() {
    let (i_plus, i_minus, i_zero) = kappa_integrals().unwrap();
    assert!((i_zero - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((i_plus * i_minus - mellin_oracle().powi(2)).abs() < 1e-10);
    assert!(i_plus > 0.0 && i_minus > 0.0);
}

#[test]
fn transport_constants_pins() {
    let k = kappas();
    assert!((k.kappa1 - 5.1707032830).abs() < 1e-8);
    assert!((k.kappa2 - 3.0 * std::f64::consts::PI / 5.0).abs() < 1e-12);
    assert!((k.kappa3 - 1.9889105835).abs() < 1e-8);
    assert!((k.kappa_eff - 3.3842692352).abs() < 1e-8);
    let holder = k.kappa2 * k.kappa2 / (k.kappa1 * k.kappa3);
    assert!((holder - 0.3454915).abs() < 1e-6);
    assert!(holder < 1.0, "strict Cauchy-Schwarz must hold");
}

#[test]
fn transport_constants_reject_bad_prefactor() {
    assert!(compute_kappas(0.0).is_err());
    assert!(compute_kappas(-1.0).is_err());
}

#[test]
fn limit_symbols_at_unit_point() {
    let k = kappas();
    let (l1, l2, l3) = limit_symbols(k, 1.0, 1.0);
    assert_relative_eq!(l1, -1.0 - k.kappa1, max_relative = 1e-14);
    assert_relative_eq!(l2, -k.kappa2, max_relative = 1e-14);
    assert_relative_eq!(l3, -k.kappa3, max_relative = 1e-14);

    let (l1b, ..) = limit_symbols(k, 2.0, 0.5);
    assert_relative_eq!(
        l1b,
        -2.0 - k.kappa1 * 0.5f64.powf(1.6),
        max_relative = 1e-14
    );
}

#[test]
fn profile_pins_and_symmetries() {
    let p = profile();
    assert!((p.v0 - 1.4170045507).abs() < 1e-7, "v0 = {}", p.v0);
    assert!((p.v_at(0.25) - 0.696273107061).abs() < 1e-8);
    assert!((p.v_at(0.5) - 1.198702039970).abs() < 1e-8);
    for &k in &[0.03, 0.17, 0.4] {
        assert_relative_eq!(p.v_at(k), p.v_at(-k), max_relative = 1e-13);
        assert_relative_eq!(p.v_at(k), p.v_at(k + 1.0), max_relative = 1e-13);
    }
}

#[test]
fn profile_has_the_five_thirds_origin_law() {
    let p = profile();
    let k = 1e-4f64;
    let ratio = p.v_at(k) / k.powf(5.0 / 3.0);
    let ideal = p.v0 * std::f64::consts::PI.powf(5.0 / 3.0);
    assert!(
        (ratio / ideal - 1.0).abs() < 5e-3,
        "V(k)/k^(5/3) = {ratio}, v0 pi^(5/3) = {ideal}"
    );
}

#[test]
fn table_profile_matches_direct_quadrature() {
    let table = assemble_kernel(200, 1e-10).unwrap();
    let tp = VProfile::from_table(&table).unwrap();
    let p = profile();
    assert!((tp.v0 - p.v0).abs() < 1e-4);
    for &k in &[0.02, 0.1, 0.3] {
        assert_relative_eq!(tp.v_at(k), p.v_at(k), max_relative = 1e-6);
    }
}

#[test]
fn symbols_are_real_for_real_laplace_points() {
    // The omega' term is odd in k; the +-k summation must cancel it to
    // round-off, leaving an imaginary part at the 1e-10 relative level.
    let p = profile();
    for &(eps, xi) in &[(1e-1, 1.0), (1e-2, 3.0)] {
        let a1 = a1_eps(p, eps, 1.0, xi).unwrap();
        let a2 = a2_eps(p, eps, 1.0, xi).unwrap();
        let a3 = a3_eps(p, eps, 1.0, xi).unwrap();
        for (name, a) in [("a1", a1), ("a2", a2), ("a3", a3)] {
            assert!(
                a.im.abs() <= 1e-10 * a.re.abs(),
                "{name}({eps}, {xi}) = {a}"
            );
        }
    }
}

#[test]
fn symbols_are_even_in_xi() {
    let p = profile();
    let plus = symbols_complex(p, 1e-2, Complex64::from(1.0), 2.0, None);
    let minus = symbols_complex(p, 1e-2, Complex64::from(1.0), -2.0, None);
    assert_relative_eq!(plus.a1.re, minus.a1.re, max_relative = 1e-12);
    assert_relative_eq!(plus.a2.re, minus.a2.re, max_relative = 1e-12);
    assert_relative_eq!(plus.a3.re, minus.a3.re, max_relative = 1e-12);
}

#[test]
fn symbols_reject_nonpositive_arguments() {
    let p = profile();
    assert!(a1_eps(p, -0.1, 1.0, 1.0).is_err());
    assert!(a2_eps(p, 0.1, 0.0, 1.0).is_err());
    assert!(a3_eps(p, 0.0, 1.0, 1.0).is_err());
}

#[test]
fn symbol_convergence_study_pins() {
    let study = convergence_study(profile(), kappas(), 1.0, 1.0, &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(study.strictly_decreasing.iter().all(|&b| b));
    // |a1 - limit| at eps = 1e-2 and the fitted a1 rate, frozen from the
    // development runs.
    assert_relative_eq!(study.errors[1][0], 1.2881590938721468, max_relative = 1e-6);
    assert_relative_eq!(study.errors[1][2], 0.003531408573353545, max_relative = 1e-4);
    assert!((study.rates[0] - 0.4433456).abs() < 1e-4, "a1 rate {}", study.rates[0]);
    assert!(convergence_study(profile(), kappas(), 1.0, 1.0, &[1e-1, 1e-2]).is_err());
}

#[test]
fn margin_scan_pin() {
    let scan = a3_lower_bound_check(profile(), 0.2, 2.0).unwrap();
    assert_relative_eq!(scan.margin, 0.9752458489309132, max_relative = 1e-9);
    assert!(scan.margin > 0.0);
    assert!(scan.at_p > 0.0 && scan.at_xi > 0.0);
}

#[test]
fn euler_ilt_inverts_closed_forms() {
    let t = 0.7;
    let exp = euler_ilt(|p| 1.0 / (p + 2.0), t, 16);
    assert!((exp - (-2.0 * t).exp()).abs() < 1e-10, "got {exp}");
    let ramp = euler_ilt(|p| 1.0 / (p * p), t, 16);
    assert!((ramp - t).abs() < 1e-9, "got {ramp}");
    let cosine = euler_ilt(|p| p / (p * p + 9.0), t, 16);
    assert!((cosine - (3.0 * t).cos()).abs() < 1e-9, "got {cosine}");
}

#[test]
fn t_symbol_resolvent_identity_at_zero_frequency() {
    // At xi = 0 nothing transports, so T_hat(p) = T0/p exactly, at every
    // epsilon.
    let p = profile();
    for eps in [1e-1, 1e-2, 1e-3] {
        for lp in [0.7, 1.0, 2.3] {
            let ts = t_symbol(p, eps, Complex64::from(lp), 0.0, Complex64::from(1.0));
            assert!(
                (ts - Complex64::from(1.0 / lp)).norm() < 1e-9,
                "eps {eps}, p {lp}: {ts}"
            );
        }
    }
}

#[test]
fn t_symbol_inversion_approaches_the_fractional_decay() {
    let p = profile();
    let k = kappas();
    let t = 0.5;
    let ideal = (-k.kappa_eff * t).exp();
    let mut rel = Vec::new();
    for eps in [1e-2, 1e-3] {
        let val = euler_ilt(|lp| t_symbol(p, eps, lp, 1.0, Complex64::from(1.0)), t, 14);
        rel.push((val - ideal).abs() / ideal);
    }
    assert!(
        rel[1] < 0.5 * rel[0],
        "finite-eps deviation should shrink: {rel:?}"
    );
    assert!(rel[1] < 0.15, "deviation at eps = 1e-3 is {}", rel[1]);
}
