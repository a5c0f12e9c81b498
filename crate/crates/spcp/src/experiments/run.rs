use std::time::Instant;

use rayon::prelude::*;
use spcp_core::model::{build_instance, incoherence_of, InstanceParams, TauMode};
use spcp_core::rng::trial_seed;
use spcp_core::solver::{recovery_error, solve};

use super::config::{Cell, ExperimentConfig, TauChoice};
use super::records::{ExperimentRecord, Status};
use crate::{Error, Result};

/// One unit of work: a cell, an optional `tau` multiplier and a trial index.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Job {
    pub cell: Cell,
    pub multiplier: Option<f64>,
    pub trial: usize,
}

/// Jobs in `(cell, multiplier, trial)` order.
pub(crate) fn jobs(cfg: &ExperimentConfig, multipliers: Option<&[f64]>) -> Vec<Job> {
    let mut out = Vec::new();
    for cell in cfg.cells() {
        let ms: Vec<Option<f64>> = match multipliers {
            Some(ms) => ms.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        for multiplier in ms {
            for trial in 0..cfg.trials_per_cell {
                out.push(Job {
                    cell,
                    multiplier,
                    trial,
                });
            }
        }
    }
    out
}

pub(crate) fn job_seed(cfg: &ExperimentConfig, job: &Job) -> u64 {
    trial_seed(cfg.base_seed, job.cell.index as u64, job.trial as u64)
}

pub(crate) fn instance_params(cfg: &ExperimentConfig, job: &Job) -> InstanceParams {
    let mode = match (&cfg.tau_mode, job.multiplier) {
        (TauChoice::Oracle, None) => TauMode::Oracle,
        _ => TauMode::Criterion,
    };
    InstanceParams {
        magnitude: cfg.magnitude,
        ..InstanceParams::new(cfg.n, job.cell.r, job.cell.rho, job.cell.p, job_seed(cfg, job))
    }
    .tau_mode(mode)
}

/// Runs `f` over `jobs` on `threads` workers; output order follows `jobs`.
pub(crate) fn run_pool<T, F>(threads: usize, jobs: &[Job], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Job) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(&f).collect()))
}

/// Builds, solves and scores one trial. Never fails: problems end up in the
/// record's `status` and `message`.
pub(crate) fn run_trial(cfg: &ExperimentConfig, job: &Job) -> ExperimentRecord {
    let start = Instant::now();
    let params = instance_params(cfg, job);
    let mut rec = ExperimentRecord {
        cell: job.cell.index,
        trial: job.trial,
        n: cfg.n,
        r: job.cell.r,
        rho: job.cell.rho,
        p: job.cell.p,
        multiplier: job.multiplier,
        seed: params.seed,
        status: Status::Ok,
        lambda: None,
        tau: None,
        mu: None,
        err_l: None,
        err_s: None,
        support_f1: None,
        iters: None,
        converged: false,
        success: false,
        message: String::new(),
        wall_time: 0.0,
    };
    let built = build_instance(&params).and_then(|inst| match job.multiplier {
        Some(m) => inst.with_tau(m * inst.tau),
        None => Ok(inst),
    });
    let inst = match built {
        Ok(inst) => inst,
        Err(e) => {
            rec.status = Status::Invalid;
            rec.message = e.to_string();
            rec.wall_time = start.elapsed().as_secs_f64();
            return rec;
        }
    };
    rec.lambda = Some(inst.lambda);
    rec.tau = Some(inst.tau);
    let truth = inst.truth.as_ref().expect("generated instances carry ground truth");
    rec.mu = Some(incoherence_of(&truth.tangent).mu);
    let outcome = solve(&inst, &cfg.solver.options()).and_then(|sol| {
        let err = recovery_error(&sol, truth)?;
        Ok((sol, err))
    });
    match outcome {
        Ok((sol, err)) => {
            rec.err_l = Some(err.err_l);
            rec.err_s = Some(err.err_s);
            rec.support_f1 = Some(err.support_f1);
            rec.iters = Some(sol.iters);
            rec.converged = sol.converged;
            rec.success = sol.converged && err.err_l <= cfg.success_threshold && err.err_s <= cfg.success_threshold;
        }
        Err(e) => {
            rec.status = Status::Error;
            rec.message = e.to_string();
        }
    }
    rec.wall_time = start.elapsed().as_secs_f64();
    rec
}

pub(crate) fn run_records(cfg: &ExperimentConfig, multipliers: Option<&[f64]>) -> Result<Vec<ExperimentRecord>> {
    let jobs = jobs(cfg, multipliers);
    run_pool(cfg.threads, &jobs, |job| run_trial(cfg, job))
}
