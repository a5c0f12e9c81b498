//! Instance directories: `manifest.json` next to the matrix files it names.
//!
//! ```json
//! {"n": 60, "r": 2, "rho": 0.05, "p": 60, "magnitude": 1.0,
//!  "lambda": 0.1290994448735806, "tau": 1234.5, "tau_mode": "criterion",
//!  "seed": 7, "format": "binary",
//!  "paths": {"m": "m.bin", "l0": "l0.bin", "s0": "s0.bin", "q_perp": "q_perp.bin"}}
//! ```
//!
//! `q_perp` holds an orthonormal basis of `Q⊥` as an `n² x p` matrix whose
//! columns are column-major vectorizations; it is absent when `p = 0`.
//! Paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spcp_core::linops::SubspaceProjector;
use spcp_core::model::{GroundTruth, InstanceParams, ProblemInstance, TauMode};

use super::{read_json, read_matrix, write_json, write_matrix, MatrixFormat};
use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceManifest {
    pub n: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
    #[serde(default = "unit_magnitude")]
    pub magnitude: f64,
    pub lambda: f64,
    pub tau: f64,
    #[serde(default = "criterion")]
    pub tau_mode: TauMode,
    pub seed: u64,
    #[serde(default)]
    pub format: MatrixFormat,
    pub paths: InstancePaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstancePaths {
    pub m: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_perp: Option<PathBuf>,
}

fn unit_magnitude() -> f64 {
    1.0
}

fn criterion() -> TauMode {
    TauMode::Criterion
}

/// Writes `inst` into `dir` (created if needed) and returns the manifest path.
pub fn save_instance(
    dir: &Path,
    inst: &ProblemInstance,
    params: &InstanceParams,
    format: MatrixFormat,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let file = |stem: &str| PathBuf::from(format!("{stem}.{}", format.extension()));
    let mut paths = InstancePaths {
        m: file("m"),
        l0: None,
        s0: None,
        q_perp: None,
    };
    write_matrix(&dir.join(&paths.m), &inst.m, format)?;
    if let Some(t) = &inst.truth {
        let (l0, s0) = (file("l0"), file("s0"));
        write_matrix(&dir.join(&l0), &t.l0, format)?;
        write_matrix(&dir.join(&s0), &t.s0, format)?;
        paths.l0 = Some(l0);
        paths.s0 = Some(s0);
    }
    if inst.q.dim_perp() > 0 {
        let q = file("q_perp");
        write_matrix(&dir.join(&q), inst.q.basis(), format)?;
        paths.q_perp = Some(q);
    }
    let manifest = InstanceManifest {
        n: inst.n,
        r: inst.truth.as_ref().map_or(params.r, |t| t.rank),
        rho: params.rho,
        p: inst.q.dim_perp(),
        magnitude: params.magnitude,
        lambda: inst.lambda,
        tau: inst.tau,
        tau_mode: params.tau_mode,
        seed: inst.seed,
        format,
        paths,
    };
    let path = dir.join(MANIFEST_NAME);
    write_json(&path, &manifest)?;
    Ok(path)
}

/// Reads an instance from a manifest file, or from a directory holding one.
pub fn load_instance(path: &Path) -> Result<(InstanceManifest, ProblemInstance)> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    };
    let manifest: InstanceManifest = read_json(&manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let read = |p: &Path| read_matrix(&dir.join(p), manifest.format);
    let m = read(&manifest.paths.m)?;
    let n = manifest.n;
    if m.shape() != (n, n) {
        return Err(Error::format(
            &manifest_path,
            None,
            format!("m is {:?}, manifest says n = {n}", m.shape()),
        ));
    }
    let q = match &manifest.paths.q_perp {
        Some(p) => SubspaceProjector::from_orthonormal_basis(n, read(p)?)?,
        None => SubspaceProjector::full(n),
    };
    if q.dim_perp() != manifest.p {
        return Err(Error::format(
            &manifest_path,
            None,
            format!("q_perp has {} columns, manifest says p = {}", q.dim_perp(), manifest.p),
        ));
    }
    let truth = match (&manifest.paths.l0, &manifest.paths.s0) {
        (Some(l0), Some(s0)) => Some(GroundTruth::from_parts(
            read(l0)?,
            read(s0)?,
            manifest.rho,
            manifest.magnitude,
        )?),
        (None, None) => None,
        _ => return Err(Error::format(&manifest_path, None, "l0 and s0 must be given together")),
    };
    let inst = ProblemInstance::new(m, q, manifest.lambda, manifest.tau, truth, manifest.seed)?;
    Ok((manifest, inst))
}
