//! Experiment runner: kernel assembly and caching, spectral reports, symbol
//! sweeps, kinetic simulations, and the acceptance-verification suite.
//!
//! Exit codes: 0 success, 1 I/O or cache-format failure, 2 numerical or
//! validation failure, 3 acceptance criterion failed.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use phonon_boltzmann::cache;
use phonon_boltzmann::config::RunConfig;
use phonon_boltzmann::error::{Error, Result};
use phonon_boltzmann::kernel::{assemble_kernel, KernelTable};
use phonon_boltzmann::linop::{DiscreteOperator, VdiagMode};
use phonon_boltzmann::manifest::{csv_bytes, fmt17, Manifest};
use phonon_boltzmann::sim::{run_epsilon_sweep, EpsilonRun};
use phonon_boltzmann::symbols::{compute_kappas, limit_symbols, mellin_oracle, symbols_complex, VProfile};
use phonon_boltzmann::verify::{run_all, VerifyContext};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "phonon",
    about = "Linearized phonon Boltzmann operator: kernel tables, symbols, simulations, verification"
)]
struct Cli {
    /// Flat key = value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra overrides as key=value (repeatable, applied in order).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true, value_name = "LIST")]
    eps: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, global = true)]
    quad_tol: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    cache: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    t_end: Option<String>,
    #[arg(long, global = true)]
    sigma: Option<String>,
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Restrict `verify` to one criterion group.
    #[arg(long, global = true)]
    only: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble the kernel table and write the PHNK cache.
    Kernel,
    /// Eigenvalue report of the symmetrized operator.
    Spectrum,
    /// Laplace-Fourier symbols a1, a2, a3 over an epsilon list.
    Symbols,
    /// Diffusion constants kappa1, kappa2, kappa3 and their oracles.
    Kappa,
    /// Kinetic simulation sweep with trace CSV output.
    Simulate,
    /// Run the acceptance criteria; exit 3 on any failure.
    Verify,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for pair in &cli.sets {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {pair:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let flags: [(&str, &Option<String>); 12] = [
        ("n", &cli.n),
        ("eps", &cli.eps),
        ("p", &cli.p),
        ("xi", &cli.xi),
        ("quad_tol", &cli.quad_tol),
        ("out_dir", &cli.out_dir),
        ("cache", &cli.cache),
        ("steps", &cli.steps),
        ("t_end", &cli.t_end),
        ("sigma", &cli.sigma),
        ("scheme", &cli.scheme),
        ("only", &cli.only),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn load_or_assemble(cfg: &RunConfig) -> Result<KernelTable> {
    let path = cfg.cache_path();
    if path.exists() {
        cache::load(&path)
    } else {
        let table = assemble_kernel(cfg.n, cfg.quad_tol)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        cache::save(&table, &path)?;
        Ok(table)
    }
}

fn cmd_kernel(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let table = assemble_kernel(cfg.n, cfg.quad_tol)?;
    let elapsed = start.elapsed().as_secs_f64();
    let path = cfg.cache_path();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    cache::save(&table, &path)?;
    let mut man = Manifest::new("kernel");
    man.input("n", cfg.n);
    man.input("quad_tol", fmt17(cfg.quad_tol));
    man.record_existing(&path)?;
    man.finish(&cfg.out_dir)?;
    println!(
        "n = {}  v0 = {:.10}  c1 = {:.10}  c2 = {:.10}  assembled in {:.1} s",
        table.grid.n, table.v0, table.c1, table.c2, elapsed
    );
    println!("cache: {}", path.display());
    Ok(())
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let table = load_or_assemble(cfg)?;
    let op = DiscreteOperator::new(table, VdiagMode::RowSum);
    let report = op.spectral_report()?;
    let rows: Vec<Vec<String>> = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| vec![i.to_string(), fmt17(l)])
        .collect();
    let mut man = Manifest::new("spectrum");
    man.input("n", cfg.n);
    man.input("quad_tol", fmt17(cfg.quad_tol));
    man.write_file(
        &cfg.out_dir,
        &format!("spectrum_n{}.csv", cfg.n),
        &csv_bytes("index,eigenvalue", &rows),
    )?;
    man.finish(&cfg.out_dir)?;
    println!(
        "n = {}  kernel eigenvalues: {:.3e}, {:.3e}  c0 = {:.8}",
        cfg.n, report.eigenvalues[0], report.eigenvalues[1], report.c0
    );
    println!(
        "residuals: ||L 1||_V = {:.3e}  ||L omega^-1||_V = {:.3e}",
        report.res_one, report.res_inv_omega
    );
    Ok(())
}

fn cmd_symbols(cfg: &RunConfig) -> Result<()> {
    let profile = VProfile::build(cfg.quad_tol.min(1e-11))?;
    let kappas = compute_kappas(profile.v0)?;
    let mut rows = Vec::new();
    for &eps in &cfg.eps_list {
        let s = symbols_complex(&profile, eps, Complex64::from(cfg.p), cfg.xi, None);
        let (l1, l2, l3) = limit_symbols(&kappas, cfg.p, cfg.xi);
        rows.push(vec![
            fmt17(eps),
            fmt17(cfg.p),
            fmt17(cfg.xi),
            fmt17(s.a1.re),
            fmt17(s.a1.im),
            fmt17(s.a2.re),
            fmt17(s.a2.im),
            fmt17(s.a3.re),
            fmt17(s.a3.im),
            fmt17(l1),
            fmt17(l2),
            fmt17(l3),
        ]);
    }
    let mut man = Manifest::new("symbols");
    man.input("eps", cfg.eps_list.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","));
    man.input("p", fmt17(cfg.p));
    man.input("xi", fmt17(cfg.xi));
    man.input("quad_tol", fmt17(cfg.quad_tol));
    man.write_file(
        &cfg.out_dir,
        "symbols.csv",
        &csv_bytes(
            "eps,p,xi,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,lim_a1,lim_a2,lim_a3",
            &rows,
        ),
    )?;
    man.finish(&cfg.out_dir)?;
    println!(
        "wrote {} symbol rows at (p, xi) = ({}, {}); v0 = {:.10}",
        rows.len(),
        cfg.p,
        cfg.xi,
        profile.v0
    );
    Ok(())
}

fn cmd_kappa(cfg: &RunConfig) -> Result<()> {
    let profile = VProfile::build(cfg.quad_tol.min(1e-11))?;
    let kappas = compute_kappas(profile.v0)?;
    let oracle = mellin_oracle();
    let rows = vec![
        vec!["v0".to_string(), fmt17(kappas.v0)],
        vec!["kappa1".to_string(), fmt17(kappas.kappa1)],
        vec!["kappa2".to_string(), fmt17(kappas.kappa2)],
        vec!["kappa3".to_string(), fmt17(kappas.kappa3)],
        vec!["kappa_eff".to_string(), fmt17(kappas.kappa_eff)],
        vec!["mellin_oracle".to_string(), fmt17(oracle)],
        vec![
            "kappa1_kappa3_closed_form".to_string(),
            fmt17((36.0 / 25.0) * oracle * oracle),
        ],
    ];
    let mut man = Manifest::new("kappa");
    man.input("quad_tol", fmt17(cfg.quad_tol));
    man.write_file(&cfg.out_dir, "kappa.csv", &csv_bytes("name,value", &rows))?;
    man.finish(&cfg.out_dir)?;
    println!(
        "v0 = {:.10}  kappa1 = {:.10}  kappa2 = {:.10}  kappa3 = {:.10}  kappa = {:.10}",
        kappas.v0, kappas.kappa1, kappas.kappa2, kappas.kappa3, kappas.kappa_eff
    );
    Ok(())
}

fn trace_csv(run: &EpsilonRun) -> Vec<u8> {
    let rows: Vec<Vec<String>> = run
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt17(r.t),
                r.j.to_string(),
                fmt17(r.xi),
                fmt17(r.t_hat.re),
                fmt17(r.t_hat.im),
                fmt17(r.s_hat.re),
                fmt17(r.s_hat.im),
                fmt17(r.h_norm),
                fmt17(r.l2_norm),
                fmt17(r.r1),
                fmt17(r.r2),
            ]
        })
        .collect();
    csv_bytes("t,j,xi,re_T,im_T,re_S,im_S,h_norm,l2_norm,r1,r2", &rows)
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let table = load_or_assemble(cfg)?;
    let op = DiscreteOperator::new(table, VdiagMode::RowSum);
    let profile = VProfile::build(cfg.quad_tol.min(1e-11))?;
    let kappas = compute_kappas(profile.v0)?;
    let mut eps = cfg.eps_list.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let report = run_epsilon_sweep(&op, &kappas, &cfg.sim_config(eps[0]), &eps)?;
    let mut man = Manifest::new("simulate");
    man.input("n", cfg.n);
    man.input("eps", eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","));
    man.input("steps", cfg.steps);
    man.input("t_end", fmt17(cfg.t_end));
    man.input("sigma", fmt17(cfg.sigma));
    for run in &report.runs {
        let name = format!("trace_eps{}.csv", run.eps);
        man.write_file(&cfg.out_dir, &name, &trace_csv(run))?;
        println!(
            "eps = {}: stiffness = {:.3e}  e = {:.6}  slaving sign {}  L2 growth {:.2e}  xi0 drift {:.2e}",
            run.eps,
            run.stiffness,
            run.e_max,
            run.slaving_sign,
            run.l2_growth_max,
            run.xi0_drift
        );
    }
    man.finish(&cfg.out_dir)?;
    if eps.len() > 1 {
        println!(
            "e decreasing: {}  slaving decreasing: {}  signs agree: {}",
            report.e_strictly_decreasing, report.slaving_decreasing, report.signs_agree
        );
    }
    Ok(())
}

/// Runs the acceptance suite; Ok(true) means every criterion passed.
fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let ctx = VerifyContext::new(cfg.quad_tol, cfg.cache_dir());
    let results = run_all(&ctx, cfg.only.as_deref())?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for r in &results {
        all_pass &= r.pass;
        println!(
            "{}  {}  measured = {:.6e}  threshold = {:.6e}  ({})",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.measured,
            r.threshold,
            r.detail
        );
        rows.push(vec![
            r.id.clone(),
            fmt17(r.measured),
            fmt17(r.threshold),
            r.pass.to_string(),
        ]);
    }
    let mut man = Manifest::new("verify");
    if let Some(only) = &cfg.only {
        man.input("only", only);
    }
    man.input("quad_tol", fmt17(cfg.quad_tol));
    man.write_file(
        &cfg.out_dir,
        "verify.csv",
        &csv_bytes("criterion,measured,threshold,pass", &rows),
    )?;
    man.finish(&cfg.out_dir)?;
    println!(
        "{} of {} criteria passed",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
    Ok(all_pass)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::CacheFormat(_) => 1,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let outcome = match cli.command {
        Cmd::Kernel => cmd_kernel(&cfg).map(|()| true),
        Cmd::Spectrum => cmd_spectrum(&cfg).map(|()| true),
        Cmd::Symbols => cmd_symbols(&cfg).map(|()| true),
        Cmd::Kappa => cmd_kappa(&cfg).map(|()| true),
        Cmd::Simulate => cmd_simulate(&cfg).map(|()| true),
        Cmd::Verify => cmd_verify(&cfg),
    };
    match outcome {
        Ok(true) => {}
        Ok(false) => std::process::exit(3),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
