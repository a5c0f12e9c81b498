use std::path::Path;

use serde::{Deserialize, Serialize};

use super::records::{ExperimentRecord, Status};
use crate::{Error, Result};

/// Aggregates over the trials of one cell (and one multiplier in a sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
    pub multiplier: Option<f64>,
    pub trials: usize,
    pub ok: usize,
    pub invalid: usize,
    pub errors: usize,
    pub converged: usize,
    pub successes: usize,
    /// `successes / trials`; absent when every trial was invalid.
    pub success_rate: Option<f64>,
    pub median_err_l: Option<f64>,
    pub median_err_s: Option<f64>,
    pub median_iters: Option<f64>,
    pub median_mu: Option<f64>,
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    })
}

/// One summary per run of consecutive records sharing `(cell, multiplier)`.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = (records[start].cell, records[start].multiplier.map(f64::to_bits));
        let end = records[start..]
            .iter()
            .position(|r| (r.cell, r.multiplier.map(f64::to_bits)) != key)
            .map_or(records.len(), |k| start + k);
        out.push(summarize_group(&records[start..end]));
        start = end;
    }
    out
}

fn summarize_group(group: &[ExperimentRecord]) -> CellSummary {
    let first = &group[0];
    let count = |s: Status| group.iter().filter(|r| r.status == s).count();
    let collect = |f: fn(&ExperimentRecord) -> Option<f64>| median(group.iter().filter_map(f).collect());
    let invalid = count(Status::Invalid);
    let successes = group.iter().filter(|r| r.success).count();
    CellSummary {
        cell: first.cell,
        r: first.r,
        rho: first.rho,
        p: first.p,
        multiplier: first.multiplier,
        trials: group.len(),
        ok: count(Status::Ok),
        invalid,
        errors: count(Status::Error),
        converged: group.iter().filter(|r| r.converged).count(),
        successes,
        success_rate: (invalid < group.len()).then(|| successes as f64 / group.len() as f64),
        median_err_l: collect(|r| r.err_l),
        median_err_s: collect(|r| r.err_s),
        median_iters: collect(|r| r.iters.map(|i| i as f64)),
        median_mu: collect(|r| r.mu),
    }
}

pub const SUMMARY_HEADER: &str = "cell,r,rho,p,multiplier,trials,ok,invalid,errors,converged,successes,success_rate,median_err_l,median_err_s,median_iters,median_mu";

pub fn write_summary_csv(path: &Path, cells: &[CellSummary]) -> Result<()> {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    let mut text = format!("{SUMMARY_HEADER}\n");
    for c in cells {
        text.push_str(&format!(
            "{},{},{:.16e},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.cell,
            c.r,
            c.rho,
            c.p,
            opt(c.multiplier),
            c.trials,
            c.ok,
            c.invalid,
            c.errors,
            c.converged,
            c.successes,
            opt(c.success_rate),
            opt(c.median_err_l),
            opt(c.median_err_s),
            opt(c.median_iters),
            opt(c.median_mu),
        ));
    }
    std::fs::write(path, text).map_err(Error::io(path))
}

/// Mean success rate at each value of one grid axis, averaged over the other
/// axes. Reported, not asserted: the theory fixes no constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisTrend {
    pub axis: String,
    pub values: Vec<f64>,
    pub mean_success: Vec<Option<f64>>,
    /// Success never increases as the axis value grows.
    pub nonincreasing: bool,
}

pub fn axis_trends(cells: &[CellSummary]) -> Vec<AxisTrend> {
    let axes: [(&str, fn(&CellSummary) -> f64); 3] = [("r", |c| c.r as f64), ("rho", |c| c.rho), ("p", |c| c.p as f64)];
    axes.iter()
        .map(|(name, key)| {
            let mut values: Vec<f64> = cells.iter().map(key).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let mean_success: Vec<Option<f64>> = values
                .iter()
                .map(|&v| {
                    let rates: Vec<f64> = cells
                        .iter()
                        .filter(|c| key(c) == v)
                        .filter_map(|c| c.success_rate)
                        .collect();
                    (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
                })
                .collect();
            let present: Vec<f64> = mean_success.iter().flatten().copied().collect();
            AxisTrend {
                axis: name.to_string(),
                nonincreasing: present.windows(2).all(|w| w[1] <= w[0]),
                values,
                mean_success,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(vec![]), None);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
