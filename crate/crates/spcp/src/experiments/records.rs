//! Per-trial record CSV.
//!
//! Header (fixed):
//!
//! ```text
//! cell,trial,n,r,rho,p,multiplier,seed,status,lambda,tau,mu,err_l,err_s,support_f1,iters,converged,success,message,wall_time
//! ```
//!
//! Floats are written with 17 significant digits. Empty fields mean "not
//! available" (no multiplier outside a sweep, no metrics for invalid cells).
//! `status` is `ok`, `invalid` (the cell's parameters were rejected) or
//! `error` (the trial failed). `wall_time` is in seconds and is the only
//! column that varies between otherwise identical runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const RECORD_HEADER: [&str; 20] = [
    "cell",
    "trial",
    "n",
    "r",
    "rho",
    "p",
    "multiplier",
    "seed",
    "status",
    "lambda",
    "tau",
    "mu",
    "err_l",
    "err_s",
    "support_f1",
    "iters",
    "converged",
    "success",
    "message",
    "wall_time",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Invalid,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Invalid => "invalid",
            Status::Error => "error",
        })
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ok" => Ok(Status::Ok),
            "invalid" => Ok(Status::Invalid),
            "error" => Ok(Status::Error),
            _ => Err(format!("unknown status {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub cell: usize,
    pub trial: usize,
    pub n: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
    pub multiplier: Option<f64>,
    pub seed: u64,
    pub status: Status,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    /// Incoherence of the planted low-rank part.
    pub mu: Option<f64>,
    pub err_l: Option<f64>,
    pub err_s: Option<f64>,
    pub support_f1: Option<f64>,
    pub iters: Option<usize>,
    pub converged: bool,
    /// `converged && err_l <= threshold && err_s <= threshold`.
    pub success: bool,
    pub message: String,
    pub wall_time: f64,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

impl ExperimentRecord {
    fn fields(&self) -> [String; 20] {
        [
            self.cell.to_string(),
            self.trial.to_string(),
            self.n.to_string(),
            self.r.to_string(),
            float(self.rho),
            self.p.to_string(),
            opt_float(self.multiplier),
            self.seed.to_string(),
            self.status.to_string(),
            opt_float(self.lambda),
            opt_float(self.tau),
            opt_float(self.mu),
            opt_float(self.err_l),
            opt_float(self.err_s),
            opt_float(self.support_f1),
            self.iters.map(|i| i.to_string()).unwrap_or_default(),
            self.converged.to_string(),
            self.success.to_string(),
            self.message.replace(['\n', '\r'], " "),
            float(self.wall_time),
        ]
    }

    fn parse(row: &csv::StringRecord) -> std::result::Result<Self, String> {
        if row.len() != RECORD_HEADER.len() {
            return Err(format!("expected {} fields, found {}", RECORD_HEADER.len(), row.len()));
        }
        fn req<T: FromStr>(row: &csv::StringRecord, i: usize) -> std::result::Result<T, String>
        where
            T::Err: fmt::Display,
        {
            row[i]
                .parse()
                .map_err(|e| format!("{}: {:?}: {e}", RECORD_HEADER[i], &row[i]))
        }
        fn opt<T: FromStr>(row: &csv::StringRecord, i: usize) -> std::result::Result<Option<T>, String>
        where
            T::Err: fmt::Display,
        {
            if row[i].is_empty() {
                Ok(None)
            } else {
                req(row, i).map(Some)
            }
        }
        Ok(ExperimentRecord {
            cell: req(row, 0)?,
            trial: req(row, 1)?,
            n: req(row, 2)?,
            r: req(row, 3)?,
            rho: req(row, 4)?,
            p: req(row, 5)?,
            multiplier: opt(row, 6)?,
            seed: req(row, 7)?,
            status: req(row, 8)?,
            lambda: opt(row, 9)?,
            tau: opt(row, 10)?,
            mu: opt(row, 11)?,
            err_l: opt(row, 12)?,
            err_s: opt(row, 13)?,
            support_f1: opt(row, 14)?,
            iters: opt(row, 15)?,
            converged: req(row, 16)?,
            success: req(row, 17)?,
            message: row[18].to_string(),
            wall_time: req(row, 19)?,
        })
    }
}

pub fn encode_records(records: &[ExperimentRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).expect("writing to memory");
    for r in records {
        w.write_record(r.fields()).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("fields are UTF-8")
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    std::fs::write(path, encode_records(records)).map_err(Error::io(path))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    decode_records(&text).map_err(|(line, msg)| Error::format(path, Some(line), msg))
}

/// Parses [`encode_records`] output. Errors carry the 1-based line number.
pub fn decode_records(text: &str) -> std::result::Result<Vec<ExperimentRecord>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    match rows.next() {
        Some(Ok(h)) if h.iter().eq(RECORD_HEADER) => {}
        Some(Ok(_)) => return Err((1, "unexpected header".into())),
        Some(Err(e)) => return Err((1, e.to_string())),
        None => return Err((1, "missing header".into())),
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| (e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        out.push(ExperimentRecord::parse(&row).map_err(|msg| (line, msg))?);
    }
    Ok(out)
}

/// Record CSV with the `wall_time` column removed: the bytes that must agree
/// between runs with the same configuration.
pub fn without_wall_time(csv_text: &str) -> String {
    let mut out = String::with_capacity(csv_text.len());
    for line in csv_text.lines() {
        out.push_str(line.rsplit_once(',').map_or(line, |(head, _)| head));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(k: usize) -> ExperimentRecord {
        let x = (k as f64 + 0.1).sqrt() / 7.0;
        ExperimentRecord {
            cell: k / 10,
            trial: k % 10,
            n: 60,
            r: 1 + k % 3,
            rho: 0.05 + x * 1e-3,
            p: k % 61,
            multiplier: (k % 2 == 0).then_some(x * 10.0),
            seed: (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            status: [Status::Ok, Status::Invalid, Status::Error][k % 3],
            lambda: Some(1.0 / 60f64.sqrt()),
            tau: (k % 3 == 0).then_some(1e4 * x),
            mu: Some(x * 3.0),
            err_l: (k % 3 == 0).then_some(x * 1e-9),
            err_s: (k % 3 == 0).then_some(x * 1e-300),
            support_f1: (k % 5 != 0).then_some(1.0),
            iters: (k % 3 == 0).then_some(k * 7),
            converged: k % 4 != 0,
            success: k % 4 == 1,
            message: if k % 7 == 0 {
                format!("r, \"bad\" {k}")
            } else {
                String::new()
            },
            wall_time: x,
        }
    }

    #[test]
    fn empty_list_is_header_only() {
        let text = encode_records(&[]);
        assert_eq!(text, format!("{}\n", RECORD_HEADER.join(",")));
        assert!(decode_records(&text).unwrap().is_empty());
    }

    #[test]
    fn thousand_records_round_trip() {
        let records: Vec<_> = (0..1000).map(synthetic).collect();
        assert_eq!(decode_records(&encode_records(&records)).unwrap(), records);
    }

    #[test]
    fn truncated_row_names_its_line() {
        let text = encode_records(&(0..3).map(synthetic).collect::<Vec<_>>());
        let mut lines: Vec<&str> = text.lines().collect();
        let cut = &lines[2][..lines[2].len() / 2];
        lines[2] = cut;
        let (line, msg) = decode_records(&lines.join("\n")).unwrap_err();
        assert_eq!(line, 3, "{msg}");
    }

    #[test]
    fn wall_time_is_stripped() {
        let mut a = synthetic(3);
        let text_a = encode_records(&[a.clone()]);
        a.wall_time += 1.0;
        let text_b = encode_records(&[a]);
        assert_ne!(text_a, text_b);
        assert_eq!(without_wall_time(&text_a), without_wall_time(&text_b));
    }
}
