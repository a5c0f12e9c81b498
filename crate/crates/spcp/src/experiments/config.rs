use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spcp_core::solver::SolverOptions;

use crate::formats::read_json;
use crate::{Error, Result};

/// Multipliers of the data-driven `tau` used when none are configured.
pub const DEFAULT_SWEEP: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];

/// JSON configuration shared by `phase`, `tau-sweep` and `lemmas`.
///
/// ```json
/// {"n": 60,
///  "grid": {"r": [1, 2, 4], "rho": [0.02, 0.05, 0.1], "p": [0, 30, 60]},
///  "trials_per_cell": 10, "tau_mode": "criterion", "success_threshold": 1e-3,
///  "base_seed": 0, "output_dir": "out", "threads": 4}
/// ```
///
/// `tau_mode` is `"criterion"`, `"oracle"` or `{"sweep": [multipliers]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub grid: Grid,
    #[serde(default = "one")]
    pub trials_per_cell: usize,
    #[serde(default)]
    pub tau_mode: TauChoice,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub threads: usize,
    /// Magnitude of the sparse entries.
    #[serde(default = "unit")]
    pub magnitude: f64,
    #[serde(default)]
    pub solver: SolverSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub r: Vec<usize>,
    pub rho: Vec<f64>,
    pub p: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauChoice {
    #[default]
    Criterion,
    Oracle,
    /// Multiples of the data-driven value.
    Sweep(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: default_tol(),
            max_iters: default_max_iters(),
        }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol_feas: self.tol,
            tol_fix: self.tol,
            max_iters: self.max_iters,
            ..SolverOptions::default()
        }
    }
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn default_threshold() -> f64 {
    1e-3
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_tol() -> f64 {
    1e-7
}
fn default_max_iters() -> usize {
    50_000
}

/// One `(r, rho, p)` point of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.grid.r.is_empty() || self.grid.rho.is_empty() || self.grid.p.is_empty() {
            return bad("grid lists r, rho and p must be non-empty".into());
        }
        if self.grid.r.contains(&0) {
            return bad("grid.r must not contain 0 (need r >= 1)".into());
        }
        if let Some(rho) = self.grid.rho.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return bad(format!("grid.rho must lie in [0, 1], got {rho}"));
        }
        if self.trials_per_cell == 0 {
            return bad("trials_per_cell must be >= 1".into());
        }
        if !(self.success_threshold > 0.0) {
            return bad(format!("success_threshold must be > 0, got {}", self.success_threshold));
        }
        if self.threads == 0 {
            return bad("threads must be >= 1".into());
        }
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return bad(format!("magnitude must be > 0, got {}", self.magnitude));
        }
        if let TauChoice::Sweep(m) = &self.tau_mode {
            check_multipliers(m)?;
        }
        self.solver.options().validate()?;
        Ok(())
    }

    /// Cells in `r`-major, then `rho`, then `p` order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &r in &self.grid.r {
            for &rho in &self.grid.rho {
                for &p in &self.grid.p {
                    out.push(Cell {
                        index: out.len(),
                        r,
                        rho,
                        p,
                    });
                }
            }
        }
        out
    }

    /// Sweep multipliers, falling back to [`DEFAULT_SWEEP`].
    pub fn sweep_multipliers(&self) -> Vec<f64> {
        match &self.tau_mode {
            TauChoice::Sweep(m) => m.clone(),
            _ => DEFAULT_SWEEP.to_vec(),
        }
    }
}

pub(crate) fn check_multipliers(m: &[f64]) -> Result<()> {
    if m.is_empty() {
        return Err(Error::Config("sweep multipliers must be non-empty".into()));
    }
    if let Some(x) = m.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Config(format!("sweep multipliers must be positive, got {x}")));
    }
    Ok(())
}
