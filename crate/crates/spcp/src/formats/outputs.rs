//! Solver and certificate outputs: a JSON summary plus matrix files in the
//! instance's format.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spcp_core::certificate::{BoundsReport, CertificateCandidate, CertificateReport};
use spcp_core::solver::{RecoveryError, Solution, SolverOptions, TraceRow};

use super::{write_json, write_matrix, MatrixFormat};
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "iter,feas,fixL,fixS,dual";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPaths {
    pub l: PathBuf,
    pub s: PathBuf,
    pub y: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub converged: bool,
    pub iters: usize,
    pub feas_residual: f64,
    pub fix_residual: f64,
    pub fix_l: f64,
    pub fix_s: f64,
    pub restarts: usize,
    pub backtracks: usize,
    pub step: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub lambda: f64,
    pub tau: f64,
    pub options: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryError>,
    pub format: MatrixFormat,
    pub paths: SolutionPaths,
}

impl SolutionFile {
    pub fn new(
        sol: &Solution,
        options: SolverOptions,
        lambda: f64,
        tau: f64,
        objectives: (f64, f64),
        recovery: Option<RecoveryError>,
        format: MatrixFormat,
    ) -> Self {
        let file = |stem: &str| PathBuf::from(format!("{stem}.{}", format.extension()));
        SolutionFile {
            converged: sol.converged,
            iters: sol.iters,
            feas_residual: sol.feas_residual,
            fix_residual: sol.fix_residual,
            fix_l: sol.fix_l,
            fix_s: sol.fix_s,
            restarts: sol.restarts,
            backtracks: sol.backtracks,
            step: sol.step,
            primal_objective: objectives.0,
            dual_objective: objectives.1,
            lambda,
            tau,
            options,
            recovery,
            format,
            paths: SolutionPaths {
                l: file("l"),
                s: file("s"),
                y: file("y"),
                trace: options.trace.then(|| PathBuf::from("trace.csv")),
            },
        }
    }
}

/// Writes `solution.json`, the matrices and (if recorded) the trace into `dir`.
pub fn save_solution(dir: &Path, file: &SolutionFile, sol: &Solution) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    write_matrix(&dir.join(&file.paths.l), &sol.l, file.format)?;
    write_matrix(&dir.join(&file.paths.s), &sol.s, file.format)?;
    write_matrix(&dir.join(&file.paths.y), &sol.y, file.format)?;
    if let Some(trace) = &file.paths.trace {
        write_trace(&dir.join(trace), &sol.trace)?;
    }
    let path = dir.join("solution.json");
    write_json(&path, file)?;
    Ok(path)
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(Error::io(path))?;
    let mut w = std::io::BufWriter::new(f);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in rows {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.iter, r.feas, r.fix_l, r.fix_s, r.dual
            )?;
        }
        w.flush()
    };
    emit().map_err(Error::io(path))
}

/// JSON written by `certify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub verdict: String,
    pub report: CertificateReport,
    /// Bounds on the least-squares `W^Q` (absent when it could not be built).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wq: Option<BoundsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wq_error: Option<String>,
    pub format: MatrixFormat,
    /// Candidate `W`, `F`, `D`, relative to the report's directory.
    pub paths: [PathBuf; 3],
}

pub fn save_certificate(
    dir: &Path,
    candidate: &CertificateCandidate,
    report: &CertificateReport,
    wq: std::result::Result<BoundsReport, String>,
    format: MatrixFormat,
) -> Result<(PathBuf, CertificateFile)> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let names = ["w", "f", "d"].map(|s| PathBuf::from(format!("{s}.{}", format.extension())));
    for (name, x) in names.iter().zip([&candidate.w, &candidate.f, &candidate.d]) {
        write_matrix(&dir.join(name), x, format)?;
    }
    let (wq, wq_error) = match wq {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e)),
    };
    let file = CertificateFile {
        verdict: report.verdict.as_str().to_string(),
        report: report.clone(),
        wq,
        wq_error,
        format,
        paths: names,
    };
    let path = dir.join("certificate.json");
    write_json(&path, &file)?;
    Ok((path, file))
}
