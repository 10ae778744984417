use std::sync::OnceLock;

use phonon_boltzmann::kernel::assemble_kernel;
use phonon_boltzmann::linop::{DiscreteOperator, VdiagMode};
use phonon_boltzmann::sim::{run_epsilon_sweep, InitialData, Scheme, SimConfig, Simulator};
use phonon_boltzmann::symbols::{compute_kappas, KappaSet};
use phonon_boltzmann::Error;

fn op() -> &'static DiscreteOperator {
    static OP: OnceLock<DiscreteOperator> = OnceLock::new();
    OP.get_or_init(|| {
        DiscreteOperator::new(assemble_kernel(64, 1e-9).unwrap(), VdiagMode::RowSum)
    })
}

fn kappas() -> &'static KappaSet {
    static KAPPAS: OnceLock<KappaSet> = OnceLock::new();
    KAPPAS.get_or_init(|| compute_kappas(1.4170045376).unwrap())
}

fn small_config(eps: f64) -> SimConfig {
    let mut cfg = SimConfig::sweep_default(eps);
    cfg.m_modes = 8;
    cfg.t_end = 0.2;
    cfg.steps = 100;
    cfg.rec_every = 10;
    cfg
}

#[test]
fn config_validation() {
    let op = op();

    let mut cfg = small_config(0.2);
    cfg.steps = 0;
    assert!(matches!(Simulator::new(cfg, op), Err(Error::Config(_))));

    let mut cfg = small_config(0.2);
    cfg.m_modes = 7;
    assert!(matches!(Simulator::new(cfg, op), Err(Error::Config(_))));

    let mut cfg = small_config(0.2);
    cfg.rec_every = 7;
    assert!(matches!(Simulator::new(cfg, op), Err(Error::Config(_))));

    let mut cfg = small_config(0.2);
    cfg.eps = -0.5;
    assert!(matches!(Simulator::new(cfg, op), Err(Error::Config(_))));

    // A huge step at small eps trips the stiffness guard.
    let mut cfg = small_config(1e-3);
    cfg.steps = 1;
    cfg.rec_every = 1;
    cfg.t_end = 10.0;
    assert!(matches!(Simulator::new(cfg, op), Err(Error::Config(_))));
}

#[test]
fn crank_nicolson_run_invariants() {
    let sim = Simulator::new(small_config(0.2), op()).unwrap();
    let run = sim.run(kappas()).unwrap();

    assert!(run.stiffness > 0.0 && run.stiffness <= 10.0);
    assert!(run.e_max > 0.0);
    assert!(
        run.xi0_drift <= 1e-12,
        "mean mode must be conserved, drift {:e}",
        run.xi0_drift
    );
    assert!(
        run.l2_growth_max <= 1e-12,
        "L2 norm must not grow, got {:e}",
        run.l2_growth_max
    );
    assert!(run.slaving_sign == 1 || run.slaving_sign == -1);
    assert!(run.h_norm_max.is_finite());
    assert!(run.r1_laplace_avg >= 0.0 && run.r2_laplace_avg >= 0.0);

    let m_half = 8 / 2 + 1;
    let records = 100 / 10 + 1;
    assert_eq!(run.rows.len(), m_half * records);
    let t_final = run.rows.iter().map(|r| r.t).fold(0.0f64, f64::max);
    assert!((t_final - 0.2).abs() < 1e-12);
}

#[test]
fn implicit_euler_is_dissipative() {
    let mut cfg = small_config(0.2);
    cfg.scheme = Scheme::ImplicitEuler;
    let run = Simulator::new(cfg, op()).unwrap().run(kappas()).unwrap();
    assert!(run.l2_growth_max <= 1e-12);
    assert!(run.xi0_drift <= 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let a = Simulator::new(small_config(0.2), op()).unwrap().run(kappas()).unwrap();
    let b = Simulator::new(small_config(0.2), op()).unwrap().run(kappas()).unwrap();
    assert_eq!(a.e_max.to_bits(), b.e_max.to_bits());
    assert_eq!(a.xi0_drift.to_bits(), b.xi0_drift.to_bits());
    assert_eq!(a.r1_laplace_avg.to_bits(), b.r1_laplace_avg.to_bits());
}

#[test]
fn full_spectrum_evolution_keeps_conjugate_symmetry() {
    let sim = Simulator::new(small_config(0.2), op()).unwrap();
    let mut state = sim.init_full().unwrap();
    let props = sim.propagators_for(&state).unwrap();
    for _ in 0..10 {
        sim.step(&mut state, &props).unwrap();
    }
    // Mode pairs (j, M - j) see conjugate propagators and stay conjugate.
    // The self-paired Nyquist mode is the known exception: it is evolved
    // with +xi_max and picks up an imaginary part proportional to its
    // (aliased) initial amplitude.
    let m = state.jlist.len();
    let mut worst = 0.0f64;
    for i in 0..op().n() {
        for j in 1..m {
            if j == m / 2 {
                continue;
            }
            let d = (state.modes[j][i] - state.modes[m - j][i].conj()).norm();
            worst = worst.max(d);
        }
    }
    assert!(worst < 1e-12, "pairwise defect {worst:e}");
    assert!(sim.symmetry_defect(&state) > worst, "Nyquist artifact should dominate");
}

#[test]
fn custom_field_initial_data() {
    let mut cfg = small_config(0.2);
    let m = cfg.m_modes;
    let n = op().n();
    // A bump in x, modulated in k so the state has a genuine kinetic part.
    let field: Vec<Vec<f64>> = (0..m)
        .map(|im| {
            let x = im as f64 * cfg.lx / m as f64;
            let bump = (-(x - cfg.lx / 2.0).powi(2) / 8.0).exp();
            (0..n)
                .map(|ik| {
                    let k = op().table.grid.nodes[ik];
                    bump * (1.0 + 0.1 * (2.0 * std::f64::consts::PI * k).cos())
                })
                .collect()
        })
        .collect();
    cfg.initial = InitialData::Field(field);
    let run = Simulator::new(cfg, op()).unwrap().run(kappas()).unwrap();
    assert!(run.l2_growth_max <= 1e-12);
    assert!(run.xi0_drift <= 1e-12);

    let mut cfg = small_config(0.2);
    cfg.initial = InitialData::Field(vec![vec![1.0; n]; 3]);
    assert!(Simulator::new(cfg, op()).is_err());
}

#[test]
fn epsilon_sweep_reports_trends() {
    let template = small_config(0.2);
    let report = run_epsilon_sweep(op(), kappas(), &template, &[0.2, 0.1]).unwrap();
    assert_eq!(report.runs.len(), 2);
    assert_eq!(report.runs[0].eps, 0.2);
    assert_eq!(report.runs[1].eps, 0.1);
    assert_eq!(
        report.e_strictly_decreasing,
        report.runs[1].e_max < report.runs[0].e_max
    );
    assert_eq!(
        report.e_halved,
        report.runs[1].e_max <= 0.5 * report.runs[0].e_max
    );

    assert!(run_epsilon_sweep(op(), kappas(), &template, &[0.1, 0.2]).is_err());
    assert!(run_epsilon_sweep(op(), kappas(), &template, &[]).is_err());
}

#[test]
fn propagator_preserves_the_zero_mode_exactly() {
    let sim = Simulator::new(small_config(0.1), op()).unwrap();
    let mut state = sim.init().unwrap();
    let props = sim.propagators_for(&state).unwrap();
    let before = state.modes[0].clone();
    for _ in 0..20 {
        sim.step(&mut state, &props).unwrap();
    }
    // xi = 0: transport vanishes and L conserves the number density, so the
    // projected mean of the mode is frozen; pointwise values relax toward it.
    let w = op().table.grid.weight;
    let mean_before: num_complex::Complex64 = before.iter().map(|c| c * w).sum();
    let mean_after: num_complex::Complex64 = state.modes[0].iter().map(|c| c * w).sum();
    assert!((mean_before - mean_after).norm() < 1e-13);
}
