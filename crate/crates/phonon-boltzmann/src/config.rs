//! Flat key=value run configuration shared by all subcommands.
//!
//! One line per `key = value`, `#` comments, no nesting. Every numeric field
//! is validated positive and finite when set, and unknown keys are rejected,
//! so a config file is a complete, diffable record of an experiment.

use crate::error::{Error, Result};
use crate::sim::{InitialData, Scheme, SimConfig};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub quad_tol: f64,
    pub out_dir: PathBuf,
    /// Explicit cache file; defaults to <cache_dir>/kernel_n<n>.phnk.
    pub cache: Option<PathBuf>,
    pub eps_list: Vec<f64>,
    pub p: f64,
    pub xi: f64,
    pub lx: f64,
    pub m_modes: usize,
    pub t_end: f64,
    pub steps: usize,
    pub rec_every: usize,
    pub alpha: f64,
    pub tbar: f64,
    pub sigma: f64,
    pub scheme: Scheme,
    pub p_ref: f64,
    /// Criterion-group filter for `verify`.
    pub only: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 400,
            quad_tol: 1e-10,
            out_dir: PathBuf::from("out"),
            cache: None,
            eps_list: vec![0.2, 0.1, 0.05],
            p: 1.0,
            xi: 1.0,
            lx: 64.0,
            m_modes: 64,
            t_end: 1.0,
            steps: 2000,
            rec_every: 10,
            alpha: 1.6,
            tbar: 1.0,
            sigma: 2.0,
            scheme: Scheme::CrankNicolson,
            p_ref: 1.0,
            only: None,
        }
    }
}

fn pos_f64(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!(
            "{key} must be positive and finite, got {value}"
        )));
    }
    Ok(x)
}

fn pos_usize(key: &str, value: &str) -> Result<usize> {
    let x: usize = value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: not a positive integer: {value:?}")))?;
    if x == 0 {
        return Err(Error::Config(format!("{key} must be >= 1")));
    }
    Ok(x)
}

impl RunConfig {
    /// Apply one key=value assignment (file line or command-line override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = pos_usize(key, value)?,
            "quad_tol" => self.quad_tol = pos_f64(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "cache" => self.cache = Some(PathBuf::from(value)),
            "eps" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    list.push(pos_f64(key, part.trim())?);
                }
                if list.is_empty() {
                    return Err(Error::Config("eps: empty list".into()));
                }
                self.eps_list = list;
            }
            "p" => self.p = pos_f64(key, value)?,
            "xi" => {
                let x: f64 = value
                    .parse()
                    .map_err(|_| Error::Config(format!("xi: not a number: {value:?}")))?;
                if !x.is_finite() {
                    return Err(Error::Config("xi must be finite".into()));
                }
                self.xi = x;
            }
            "lx" => self.lx = pos_f64(key, value)?,
            "m_modes" => self.m_modes = pos_usize(key, value)?,
            "t_end" => self.t_end = pos_f64(key, value)?,
            "steps" => self.steps = pos_usize(key, value)?,
            "rec_every" => self.rec_every = pos_usize(key, value)?,
            "alpha" => self.alpha = pos_f64(key, value)?,
            "tbar" => self.tbar = pos_f64(key, value)?,
            "sigma" => self.sigma = pos_f64(key, value)?,
            "p_ref" => self.p_ref = pos_f64(key, value)?,
            "scheme" => {
                self.scheme = match value {
                    "crank_nicolson" => Scheme::CrankNicolson,
                    "implicit_euler" => Scheme::ImplicitEuler,
                    other => {
                        return Err(Error::Config(format!(
                            "scheme must be crank_nicolson or implicit_euler, got {other:?}"
                        )))
                    }
                }
            }
            "only" => self.only = Some(value.to_string()),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected key = value, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Cache file location: explicit `cache` key, else PHONON_CACHE_DIR,
    /// else the output directory.
    pub fn cache_path(&self) -> PathBuf {
        if let Some(p) = &self.cache {
            return p.clone();
        }
        self.cache_dir().join(format!("kernel_n{}.phnk", self.n))
    }

    /// Directory holding kernel caches (for commands spanning several n).
    pub fn cache_dir(&self) -> PathBuf {
        if let Some(p) = &self.cache {
            return p
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
        }
        std::env::var_os("PHONON_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| self.out_dir.clone())
    }

    pub fn sim_config(&self, eps: f64) -> SimConfig {
        SimConfig {
            eps,
            alpha: self.alpha,
            tbar: self.tbar,
            lx: self.lx,
            m_modes: self.m_modes,
            t_end: self.t_end,
            steps: self.steps,
            rec_every: self.rec_every,
            scheme: self.scheme,
            initial: InitialData::GaussianBump { sigma: self.sigma },
            p_ref: self.p_ref,
        }
    }
}
