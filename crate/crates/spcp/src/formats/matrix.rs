//! Dense matrix files.
//!
//! CSV: one line per row, entries separated by commas, each written with 17
//! significant digits (`{:.16e}`), which round-trips every finite `f64`.
//!
//! Binary: the 6 bytes `SCPCP1`, then `rows` and `cols` as little-endian
//! `u64`, then `rows * cols` little-endian `f64` in column-major order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spcp_core::Mat;

use crate::{Error, Result};

pub const MAGIC: &[u8; 6] = b"SCPCP1";
const HEADER_LEN: usize = 6 + 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    #[default]
    Binary,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "bin",
        }
    }
}

pub fn encode_csv(x: &Mat) -> String {
    let mut out = String::with_capacity(x.len() * 24);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", x[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Parses [`encode_csv`] output. Errors carry the 1-based line number.
pub fn decode_csv(text: &str) -> std::result::Result<Mat, (usize, String)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| (k + 1, format!("{v:?}: {e}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err((k + 1, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn encode_binary(x: &Mat) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * x.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(x.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(x.ncols() as u64).to_le_bytes());
    for v in x.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> std::result::Result<Mat, String> {
    if bytes.len() < HEADER_LEN || &bytes[..6] != MAGIC {
        return Err("missing SCPCP1 header".into());
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (word(6) as usize, word(14) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|len| len.checked_mul(8))
        .ok_or_else(|| format!("{rows} x {cols} overflows"))?;
    let data = &bytes[HEADER_LEN..];
    if data.len() != expected {
        return Err(format!(
            "{rows} x {cols} needs {expected} data bytes, found {}",
            data.len()
        ));
    }
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Mat::from_vec(rows, cols, values))
}

pub fn write_matrix(path: &Path, x: &Mat, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Csv => encode_csv(x).into_bytes(),
        MatrixFormat::Binary => encode_binary(x),
    };
    std::fs::write(path, bytes).map_err(Error::io(path))
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<Mat> {
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    match format {
        MatrixFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|e| Error::format(path, None, e.to_string()))?;
            decode_csv(&text).map_err(|(line, msg)| Error::format(path, Some(line), msg))
        }
        MatrixFormat::Binary => decode_binary(&bytes).map_err(|msg| Error::format(path, None, msg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat {
        Mat::from_fn(3, 4, |i, j| {
            let v = (i as f64 + 1.0) / (j as f64 + 3.0);
            if (i + j) % 2 == 0 {
                -v * 1e-300
            } else {
                v * 1e17
            }
        })
    }

    #[test]
    fn csv_round_trips_exactly() {
        let x = sample();
        let back = decode_csv(&encode_csv(&x)).unwrap();
        assert_eq!(back.shape(), x.shape());
        assert_eq!(back.as_slice(), x.as_slice());
    }

    #[test]
    fn binary_round_trips_exactly_and_is_column_major() {
        let x = sample();
        let bytes = encode_binary(&x);
        assert_eq!(&bytes[..6], b"SCPCP1");
        assert_eq!(u64::from_le_bytes(bytes[6..14].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[14..22].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[30..38].try_into().unwrap()), x[(1, 0)]);
        let back = decode_binary(&bytes).unwrap();
        assert_eq!(back, x);
        let empty = Mat::zeros(9, 0);
        assert_eq!(decode_binary(&encode_binary(&empty)).unwrap().shape(), (9, 0));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert_eq!(decode_csv("1,2\n3\n").unwrap_err().0, 2);
        assert_eq!(decode_csv("1,2\n3,x\n").unwrap_err().0, 2);
        let mut bytes = encode_binary(&sample());
        bytes.pop();
        assert!(decode_binary(&bytes).is_err());
        assert!(decode_binary(b"SCPCP2").is_err());
    }
}
