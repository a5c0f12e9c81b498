//! Batch experiments: phase-transition grids, `tau` sweeps and the bound
//! suite. Every trial is seeded from `(base_seed, cell, trial)` and output
//! order never depends on scheduling, so record files are reproducible for
//! any thread count.

mod config;
mod lemmas;
mod records;
mod run;
mod summary;
pub mod svg;

pub use config::{Cell, ExperimentConfig, Grid, SolverSettings, TauChoice, DEFAULT_SWEEP};
pub use lemmas::{lemma_suite, CellChecks, CheckSummary, LemmaReport, CHECK_NAMES};
pub use records::{
    decode_records, encode_records, read_records, without_wall_time, write_records, ExperimentRecord, Status,
    RECORD_HEADER,
};
pub use summary::{axis_trends, median, summarize, write_summary_csv, AxisTrend, CellSummary, SUMMARY_HEADER};

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::formats::write_json;
use crate::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SWEEP_SVG: &str = "sweep.svg";

#[derive(Debug, Clone, Serialize)]
pub struct PhaseOutput {
    pub config: ExperimentConfig,
    pub threads: usize,
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
    pub cells: Vec<CellSummary>,
    pub trends: Vec<AxisTrend>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub config: ExperimentConfig,
    pub threads: usize,
    pub multipliers: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
    /// One row per `(cell, multiplier)`.
    pub rows: Vec<CellSummary>,
    pub files: Vec<PathBuf>,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::io(path))
}

/// Solves every `(cell, trial)` of the grid and writes `records.csv`,
/// `summary.csv`, `summary.json` and one success-rate heatmap per axis pair.
pub fn phase_grid(cfg: &ExperimentConfig) -> Result<PhaseOutput> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let multipliers = match &cfg.tau_mode {
        TauChoice::Sweep(m) => Some(m.as_slice()),
        _ => None,
    };
    let records = run::run_records(cfg, multipliers)?;
    let cells = summarize(&records);
    let trends = axis_trends(&cells);

    let mut files = vec![dir.join(RECORDS_FILE), dir.join(SUMMARY_CSV)];
    write_records(&files[0], &records)?;
    write_summary_csv(&files[1], &cells)?;
    for (name, svg) in heatmaps(cfg, &cells) {
        let path = dir.join(name);
        write_text(&path, &svg)?;
        files.push(path);
    }
    files.push(dir.join(SUMMARY_JSON));
    let out = PhaseOutput {
        config: cfg.clone(),
        threads: cfg.threads,
        records,
        cells,
        trends,
        files,
    };
    write_json(&dir.join(SUMMARY_JSON), &out)?;
    Ok(out)
}

/// Mean success rate for each pair of grid axes, averaged over the rest.
fn heatmaps(cfg: &ExperimentConfig, cells: &[CellSummary]) -> Vec<(String, String)> {
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let rs = sorted(cfg.grid.r.iter().map(|&r| r as f64).collect());
    let rhos = sorted(cfg.grid.rho.clone());
    let ps = sorted(cfg.grid.p.iter().map(|&p| p as f64).collect());
    let key: [fn(&CellSummary) -> f64; 3] = [|c| c.r as f64, |c| c.rho, |c| c.p as f64];
    let axes = [("r", &rs), ("rho", &rhos), ("p", &ps)];
    let mut out = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let (xa, xs) = axes[a];
        let (yb, ys) = axes[b];
        let svg = svg::heatmap(&format!("success rate, n = {}", cfg.n), xa, xs, yb, ys, |i, j| {
            let rates: Vec<f64> = cells
                .iter()
                .filter(|c| key[a](c) == xs[i] && key[b](c) == ys[j])
                .filter_map(|c| c.success_rate)
                .collect();
            (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
        });
        out.push((format!("heatmap_{xa}_{yb}.svg"), svg));
    }
    out
}

/// Re-solves every trial at `tau = multiplier * tau_criterion` for each
/// multiplier, writing `records.csv`, `summary.csv` (one row per cell and
/// multiplier with median errors), `summary.json` and `sweep.svg`.
pub fn tau_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    if cfg.tau_mode == TauChoice::Oracle {
        return Err(Error::Config(
            "tau-sweep scales the data-driven tau; use tau_mode \"criterion\" or {\"sweep\": [...]}".into(),
        ));
    }
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let multipliers = cfg.sweep_multipliers();
    config::check_multipliers(&multipliers)?;
    let records = run::run_records(cfg, Some(&multipliers))?;
    let rows = summarize(&records);

    let files = vec![
        dir.join(RECORDS_FILE),
        dir.join(SUMMARY_CSV),
        dir.join(SWEEP_SVG),
        dir.join(SUMMARY_JSON),
    ];
    write_records(&files[0], &records)?;
    write_summary_csv(&files[1], &rows)?;
    let mut series = Vec::new();
    for cell in cfg.cells() {
        let of_cell: Vec<&CellSummary> = rows.iter().filter(|r| r.cell == cell.index).collect();
        for (what, pick) in [
            (
                "errL",
                (|r: &CellSummary| r.median_err_l) as fn(&CellSummary) -> Option<f64>,
            ),
            ("errS", |r: &CellSummary| r.median_err_s),
        ] {
            series.push(svg::Series {
                name: format!("{what} r={} rho={} p={}", cell.r, cell.rho, cell.p),
                points: of_cell.iter().filter_map(|r| Some((r.multiplier?, pick(r)?))).collect(),
            });
        }
    }
    write_text(
        &files[2],
        &svg::loglog(
            &format!("median relative error, n = {}", cfg.n),
            "tau / tau_criterion",
            "median error",
            &series,
        ),
    )?;
    let out = SweepOutput {
        config: cfg.clone(),
        threads: cfg.threads,
        multipliers,
        records,
        rows,
        files,
    };
    write_json(&dir.join(SUMMARY_JSON), &out)?;
    Ok(out)
}
