use num_complex::Complex64;

use phonon_boltzmann::dft::{forward, forward_real, inverse, symmetry_defect, xi_of_mode};
use phonon_boltzmann::fracdiff::{evolve_hat, real_space_render, slaved_s_hat, DiffusionParams};
use phonon_boltzmann::symbols::KappaSet;

fn kappas() -> KappaSet {
    KappaSet {
        v0: 1.4170045376,
        kappa1: 5.1707032830,
        kappa2: 1.8849555922,
        kappa3: 1.9889105835,
        kappa_eff: 3.3842692352,
    }
}

fn gaussian(m: usize, lx: f64, sigma: f64) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let x = i as f64 * lx / m as f64;
            (-(x - lx / 2.0).powi(2) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

#[test]
fn dft_round_trip() {
    let m = 16;
    let values: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let back = inverse(&forward(&values));
    for (a, b) in values.iter().zip(&back) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn dft_parseval() {
    let m = 32;
    let values = gaussian(m, 64.0, 2.0);
    let coeffs = forward_real(&values);
    let time_energy: f64 = values.iter().map(|v| v * v).sum();
    let freq_energy: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * m as f64;
    assert!((time_energy - freq_energy).abs() < 1e-12 * time_energy);
}

#[test]
fn real_signals_have_conjugate_symmetry() {
    let coeffs = forward_real(&gaussian(64, 64.0, 2.0));
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(symmetry_defect(&coeffs) < 1e-14 * scale.max(1e-300));

    let rendered = real_space_render(&coeffs).unwrap();
    let original = gaussian(64, 64.0, 2.0);
    for (a, b) in rendered.iter().zip(&original) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn asymmetric_spectra_are_rejected_by_the_renderer() {
    let mut coeffs = forward_real(&gaussian(16, 16.0, 1.5));
    coeffs[3] += Complex64::new(0.1, 0.0);
    assert!(real_space_render(&coeffs).is_err());
}

#[test]
fn mode_frequencies_are_aliased() {
    let (m, lx) = (16usize, 64.0);
    let unit = 2.0 * std::f64::consts::PI / lx;
    assert_eq!(xi_of_mode(0, m, lx), 0.0);
    assert!((xi_of_mode(1, m, lx) - unit).abs() < 1e-15);
    assert!((xi_of_mode(m / 2, m, lx) - 8.0 * unit).abs() < 1e-14);
    assert!((xi_of_mode(m - 1, m, lx) + unit).abs() < 1e-15);
}

#[test]
fn diffusion_params_validate_inputs() {
    let good = kappas();
    assert!(DiffusionParams::new(&good, 1.0).is_ok());
    assert!(DiffusionParams::new(&good, 0.0).is_err());
    assert!(DiffusionParams::new(&good, -2.0).is_err());

    let mut bad = kappas();
    bad.kappa2 = 4.0;
    assert!(DiffusionParams::new(&bad, 1.0).is_err());
}

#[test]
fn fractional_decay_rates() {
    let k = kappas();
    let params = DiffusionParams::new(&k, 1.0).unwrap();
    assert_eq!(params.rate(0.0), 0.0);
    assert!((params.rate(1.0) - k.kappa_eff).abs() < 1e-12);
    assert!((params.rate(-1.0) - k.kappa_eff).abs() < 1e-12);
    let ratio = params.rate(2.0) / params.rate(1.0);
    assert!((ratio - 2.0f64.powf(1.6)).abs() < 1e-12);

    let cold = DiffusionParams::new(&k, 2.0).unwrap();
    assert!((cold.rate(1.0) - k.kappa_eff / 2.0f64.powf(1.2)).abs() < 1e-12);
}

#[test]
fn evolution_decays_every_mode_but_conserves_the_mean() {
    let (m, lx) = (32usize, 64.0);
    let k = kappas();
    let params = DiffusionParams::new(&k, 1.0).unwrap();
    let t0_hat = forward_real(&gaussian(m, lx, 2.0));
    let xis: Vec<f64> = (0..m).map(|j| xi_of_mode(j, m, lx)).collect();

    let same = evolve_hat(&params, &t0_hat, &xis, 0.0).unwrap();
    for (a, b) in same.iter().zip(&t0_hat) {
        assert!((a - b).norm() < 1e-15);
    }

    let later = evolve_hat(&params, &t0_hat, &xis, 0.7).unwrap();
    assert!((later[0] - t0_hat[0]).norm() < 1e-15, "mean must be conserved");
    for j in 1..m {
        let expected = t0_hat[j] * (-params.rate(xis[j]) * 0.7).exp();
        assert!((later[j] - expected).norm() < 1e-14);
        assert!(later[j].norm() < t0_hat[j].norm());
    }

    let rendered = real_space_render(&later).unwrap();
    let peak0 = gaussian(m, lx, 2.0).into_iter().fold(0.0f64, f64::max);
    let peak = rendered.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(peak < peak0, "diffusion must flatten the bump");

    assert!(evolve_hat(&params, &t0_hat, &xis, -0.1).is_err());
    assert!(evolve_hat(&params, &t0_hat[..m - 1], &xis, 0.1).is_err());
}

#[test]
fn slaved_mode_tracks_the_temperature_spectrum() {
    let (m, lx) = (16usize, 64.0);
    let k = kappas();
    let t_hat = forward_real(&gaussian(m, lx, 2.0));
    let xis: Vec<f64> = (0..m).map(|j| xi_of_mode(j, m, lx)).collect();

    for sign in [1.0, -1.0] {
        let s_hat = slaved_s_hat(&k, &t_hat, &xis, sign);
        assert_eq!(s_hat[0], Complex64::default(), "no slaved mass at xi = 0");
        for j in 1..m {
            let expected =
                t_hat[j] * (sign * k.kappa2 / k.kappa3 * xis[j].abs().powf(0.6));
            assert!((s_hat[j] - expected).norm() < 1e-14);
        }
    }
}
