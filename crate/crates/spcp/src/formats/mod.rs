//! On-disk formats: matrices, instance manifests, solver and certificate
//! outputs.

mod instance;
mod matrix;
mod outputs;

pub use instance::{load_instance, save_instance, InstanceManifest, InstancePaths, MANIFEST_NAME};
pub use matrix::{
    decode_binary, decode_csv, encode_binary, encode_csv, read_matrix, write_matrix, MatrixFormat, MAGIC,
};
pub use outputs::{
    save_certificate, save_solution, write_trace, CertificateFile, SolutionFile, SolutionPaths, TRACE_HEADER,
};

use std::path::Path;

use crate::{Error, Result};

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, None, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(Error::io(path))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, Some(e.line()), e.to_string()))
}
