use serde::{Deserialize, Serialize};
use spcp_core::certificate::{
    build_wq, check_dim_condition, check_direct_sum_angle, check_tangent_angle, check_wq, WqMethod, WqOptions,
};
use spcp_core::linops::{frobenius, PowerOptions};
use spcp_core::model::{
    build_instance, incoherence_of, norm_chain, tau_criterion, tau_oracle, ProblemInstance, DEFAULT_ALPHA, DEFAULT_BETA,
};

use super::config::ExperimentConfig;
use super::run::{instance_params, jobs, run_pool};
use super::summary::median;
use crate::formats::write_json;
use crate::Result;

pub const LEMMA_FILE: &str = "lemmas.json";

/// Every check the suite runs, in report order.
pub const CHECK_NAMES: [&str; 13] = [
    "wq_constraints",
    "wq_methods_agree",
    "wq_spectral_norm",
    "wq_off_support_max",
    "neumann_tail_norm",
    "direct_sum_angle",
    "tangent_angle",
    "dim_condition",
    "omega_l0",
    "omega_diff",
    "l0_norm",
    "xi",
    "tau_dominance",
];

/// Measured value against its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    value: f64,
    bound: f64,
    holds: bool,
}

impl Outcome {
    fn at_most(value: f64, bound: f64) -> Self {
        Outcome {
            value,
            bound,
            holds: value <= bound,
        }
    }
    fn below(value: f64, bound: f64) -> Self {
        Outcome {
            value,
            bound,
            holds: value < bound,
        }
    }
}

type TrialOutcome = std::result::Result<Vec<std::result::Result<Outcome, String>>, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub evaluated: usize,
    pub passed: usize,
    /// Trials where the check could not be computed (counted as failures).
    pub errors: usize,
    /// `passed / evaluated`, 0 when nothing was evaluated.
    pub pass_rate: f64,
    /// Smallest `bound - value` seen.
    pub worst_margin: Option<f64>,
    pub worst_value: Option<f64>,
    pub worst_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellChecks {
    pub cell: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
    pub trials: usize,
    /// Trials whose instance could not be generated.
    pub skipped: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    /// Incoherence over the generated instances: min, median, max.
    pub mu: Option<[f64; 3]>,
    pub checks: Vec<CheckSummary>,
}

impl CellChecks {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub config: ExperimentConfig,
    pub threads: usize,
    pub cells: Vec<CellChecks>,
}

fn run_checks(inst: &ProblemInstance) -> Vec<std::result::Result<Outcome, String>> {
    let truth = inst.truth.as_ref().expect("generated instances carry ground truth");
    let power = PowerOptions::default();
    let mut out: Vec<std::result::Result<Outcome, String>> = Vec::with_capacity(CHECK_NAMES.len());

    let ls = build_wq(
        truth,
        &inst.m,
        inst.tau,
        &inst.q,
        WqMethod::LeastSquares,
        &WqOptions::default(),
    );
    let neumann = build_wq(
        truth,
        &inst.m,
        inst.tau,
        &inst.q,
        WqMethod::Neumann,
        &WqOptions::default(),
    );
    out.push(ls.as_ref().map_err(|e| e.to_string()).map(|w| {
        let rel_q = w.q_residual / w.xi.max(f64::MIN_POSITIVE);
        let rel_pi = w.pi_residual / frobenius(&w.w).max(f64::MIN_POSITIVE);
        Outcome::at_most(rel_q.max(rel_pi), 1e-8)
    }));
    out.push(match (&ls, &neumann) {
        (Ok(a), Ok(b)) => {
            let scale = frobenius(&a.w).max(f64::MIN_POSITIVE);
            Ok(Outcome::at_most(frobenius(&(&a.w - &b.w)) / scale, 1e-6))
        }
        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
    });
    let bounds = ls
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|w| check_wq(&w.w, &truth.support, inst.lambda).map_err(|e| e.to_string()));
    for name in ["spectral_norm", "off_support_max"] {
        out.push(bounds.clone().and_then(|b| {
            b.get(name)
                .map(|c| Outcome::below(c.value, c.bound))
                .ok_or_else(|| format!("missing bound {name}"))
        }));
    }
    out.push(
        neumann
            .as_ref()
            .map_err(|e| e.to_string())
            .map(|w| Outcome::at_most(w.tail_series_norm(), 4.0 / 3.0)),
    );
    out.push(
        check_direct_sum_angle(&truth.tangent, &truth.support, &inst.q, &power)
            .map(|r| Outcome {
                value: r.measured,
                bound: r.bound,
                holds: r.holds,
            })
            .map_err(|e| e.to_string()),
    );
    out.push(
        check_tangent_angle(&inst.q, &truth.tangent, &power)
            .map(|r| Outcome {
                value: r.measured,
                bound: r.bound,
                holds: r.holds,
            })
            .map_err(|e| e.to_string()),
    );
    out.push(
        check_dim_condition(&inst.q, &truth.tangent, &truth.support, &power)
            .map(|r| Outcome {
                value: r.pairwise.iter().copied().fold(0.0, f64::max),
                bound: 1.0,
                holds: r.holds,
            })
            .map_err(|e| e.to_string()),
    );
    match norm_chain(truth, &inst.m, inst.tau) {
        Ok(c) => {
            out.push(Ok(Outcome::at_most(c.omega_l0, c.omega_l0_bound())));
            out.push(Ok(Outcome::at_most(c.omega_diff, c.omega_diff_bound())));
            out.push(Ok(Outcome::at_most(c.l0_frob, c.l0_bound())));
            out.push(Ok(Outcome::at_most(c.xi, c.xi_bound())));
        }
        Err(e) => out.extend((0..4).map(|_| Err(e.to_string()))),
    }
    out.push(
        tau_oracle(truth, &inst.m, inst.lambda, DEFAULT_ALPHA, DEFAULT_BETA)
            .and_then(|o| Ok((o, tau_criterion(&inst.m, inst.lambda)?)))
            .map(|(o, c)| Outcome::at_most(o, c * (1.0 + 1e-9)))
            .map_err(|e| e.to_string()),
    );
    debug_assert_eq!(out.len(), CHECK_NAMES.len());
    out
}

/// Runs every check of [`CHECK_NAMES`] on `trials_per_cell` instances of each
/// cell and writes `lemmas.json` with per-check pass rates and worst margins.
pub fn lemma_suite(cfg: &ExperimentConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(crate::Error::io(dir))?;
    let all = jobs(cfg, None);
    let results: Vec<(TrialOutcome, Option<f64>)> = run_pool(cfg.threads, &all, |job| {
        match build_instance(&instance_params(cfg, job)) {
            Ok(inst) => {
                let mu = inst.truth.as_ref().map(|t| incoherence_of(&t.tangent).mu);
                (Ok(run_checks(&inst)), mu)
            }
            Err(e) => (Err(e.to_string()), None),
        }
    })?;

    let mut cells = Vec::new();
    for cell in cfg.cells() {
        let of_cell: Vec<&(TrialOutcome, Option<f64>)> = all
            .iter()
            .zip(&results)
            .filter(|(job, _)| job.cell.index == cell.index)
            .map(|(_, res)| res)
            .collect();
        let skip_reason = of_cell.iter().find_map(|(r, _)| r.as_ref().err().cloned());
        let skipped = of_cell.iter().filter(|(r, _)| r.is_err()).count();
        let mus: Vec<f64> = of_cell.iter().filter_map(|(_, mu)| *mu).collect();
        let mu = (!mus.is_empty()).then(|| {
            let lo = mus.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = mus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            [lo, median(mus.clone()).unwrap_or(lo), hi]
        });
        let checks = CHECK_NAMES
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let mut s = CheckSummary {
                    name: name.to_string(),
                    evaluated: 0,
                    passed: 0,
                    errors: 0,
                    pass_rate: 0.0,
                    worst_margin: None,
                    worst_value: None,
                    worst_bound: None,
                    first_error: None,
                };
                for outcomes in of_cell.iter().filter_map(|(r, _)| r.as_ref().ok()) {
                    s.evaluated += 1;
                    match &outcomes[k] {
                        Ok(o) => {
                            s.passed += o.holds as usize;
                            let margin = o.bound - o.value;
                            if s.worst_margin.map_or(true, |w| margin < w) {
                                s.worst_margin = Some(margin);
                                s.worst_value = Some(o.value);
                                s.worst_bound = Some(o.bound);
                            }
                        }
                        Err(e) => {
                            s.errors += 1;
                            s.first_error.get_or_insert_with(|| e.clone());
                        }
                    }
                }
                if s.evaluated > 0 {
                    s.pass_rate = s.passed as f64 / s.evaluated as f64;
                }
                s
            })
            .collect();
        cells.push(CellChecks {
            cell: cell.index,
            r: cell.r,
            rho: cell.rho,
            p: cell.p,
            trials: of_cell.len(),
            skipped,
            skip_reason,
            mu,
            checks,
        });
    }
    let report = LemmaReport {
        config: cfg.clone(),
        threads: cfg.threads,
        cells,
    };
    write_json(&dir.join(LEMMA_FILE), &report)?;
    Ok(report)
}
