//! Dual gradient ascent for the strongly convex program.
//!
//! With `g(L) = ||L||_* + ||L||_F²/(2 tau)` and `h(S) = lambda ||S||_1 +
//! ||S||_F²/(2 tau)` both `(1/tau)`-strongly convex, the Lagrange dual of
//! `min g(L) + h(S)` s.t. `P_Q(L + S) = P_Q M` is differentiable with a
//! `2 tau`-Lipschitz gradient. The solver works in the scaled multiplier
//! `Ỹ = tau Y ∈ Q`, where the primal minimizers are `L = svt(Ỹ, tau)` and
//! `S = soft_threshold(Ỹ, lambda tau)`, and the stable step is `1/2`.

use alloc::format;
use alloc::vec::Vec;

use crate::linops::{ensure_square, Projector};
use crate::linops::{frobenius, inner, l1_norm, nuclear_norm, soft_threshold, svt, svt_with_values, Mat, SupportSet};
use crate::model::{GroundTruth, ProblemInstance};
use crate::{Error, Result};

/// Iterations between checks that `Ỹ` stays in `Q`.
const Q_CHECK_EVERY: usize = 100;
const Q_CHECK_TOL: f64 = 1e-8;
/// `dual_objective` refuses multipliers further than this from `Q`.
const Q_REJECT_TOL: f64 = 1e-6;
/// Relative slack before a dual decrease counts as one.
const ASCENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Step on the scaled multiplier, in `(0, 1/2]`.
    pub step: f64,
    /// Nesterov momentum with restart on dual decrease.
    pub accelerate: bool,
    pub max_iters: usize,
    pub tol_feas: f64,
    pub tol_fix: f64,
    /// Record a [`TraceRow`] per iteration.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            step: 0.5,
            accelerate: true,
            max_iters: 50_000,
            tol_feas: 1e-7,
            tol_fix: 1e-7,
            trace: false,
        }
    }
}

impl SolverOptions {
    /// Plain gradient ascent (no momentum).
    pub fn plain() -> Self {
        SolverOptions {
            accelerate: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(Error::invalid(
                "step",
                format!("need 0 < step <= 1/2, got {}", self.step),
            ));
        }
        if !(self.tol_feas > 0.0) {
            return Err(Error::invalid("tol_feas", "must be > 0"));
        }
        if !(self.tol_fix > 0.0) {
            return Err(Error::invalid("tol_fix", "must be > 0"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be positive"));
        }
        Ok(())
    }
}

/// One row of the convergence trace.
///
/// `fix_l` and `fix_s` here are the relative changes of the primal iterates
/// between consecutive iterations (the first row measures against zero); the
/// fixed-point residuals proper are only evaluated when the feasibility test
/// passes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub iter: usize,
    pub feas: f64,
    pub fix_l: f64,
    pub fix_s: f64,
    pub dual: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub l: Mat,
    pub s: Mat,
    /// Scaled multiplier `Ỹ = tau Y`, in `Q`.
    pub y: Mat,
    pub iters: usize,
    pub converged: bool,
    pub feas_residual: f64,
    /// `max(fix_l, fix_s)`.
    pub fix_residual: f64,
    pub fix_l: f64,
    pub fix_s: f64,
    /// Dual objective at every point where the primal pair was evaluated.
    /// In plain mode these are the accepted iterates; with momentum they are
    /// the extrapolated points.
    pub dual_values: Vec<f64>,
    /// Step halvings triggered by a dual decrease (plain mode).
    pub backtracks: usize,
    /// Momentum resets.
    pub restarts: usize,
    /// Step in effect at exit.
    pub step: f64,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KktResidual {
    pub feas: f64,
    pub fix_l: f64,
    pub fix_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoveryError {
    pub err_l: f64,
    pub err_s: f64,
    pub support_f1: f64,
}

/// Primal pair and dual value at a multiplier.
struct Point {
    y: Mat,
    l: Mat,
    s: Mat,
    /// `P_Q(M - L - S)`.
    grad: Mat,
    dual: f64,
}

struct Evaluator<'a> {
    inst: &'a ProblemInstance,
    measured: Mat,
    feas_scale: f64,
}

impl<'a> Evaluator<'a> {
    fn new(inst: &'a ProblemInstance) -> Self {
        let measured = inst.measured();
        let feas_scale = frobenius(&measured).max(1.0);
        Evaluator {
            inst,
            measured,
            feas_scale,
        }
    }

    fn primal(&self, y: &Mat) -> (Mat, Vec<f64>, Mat) {
        let tau = self.inst.tau;
        let (l, sv) = svt_with_values(y, tau).expect("tau validated positive");
        let s = soft_threshold(y, self.inst.lambda * tau).expect("lambda validated positive");
        (l, sv, s)
    }

    fn at(&self, y: Mat) -> Point {
        let (l, sv, s) = self.primal(&y);
        let grad = self.inst.q.project_q(&(&self.inst.m - &l - &s));
        let l_sq: f64 = sv.iter().map(|v| v * v).sum();
        let s_norm = frobenius(&s);
        let dual = dual_from_parts(&y, &self.measured, l_sq, s_norm * s_norm, self.inst.tau);
        Point { y, l, s, grad, dual }
    }

    fn feas(&self, p: &Point) -> f64 {
        frobenius(&p.grad) / self.feas_scale
    }

    /// Fixed-point residuals of `(l, s)` against the multiplier `y`.
    fn fix(&self, l: &Mat, s: &Mat, y: &Mat) -> (f64, f64) {
        let (l_star, _, s_star) = self.primal(y);
        (
            frobenius(&(l - l_star)) / (1.0 + frobenius(l)),
            frobenius(&(s - s_star)) / (1.0 + frobenius(s)),
        )
    }
}

fn dual_from_parts(y: &Mat, measured: &Mat, l_sq: f64, s_sq: f64, tau: f64) -> f64 {
    (inner(y, measured) - 0.5 * (l_sq + s_sq)) / tau
}

fn check_in_q(y: &Mat, inst: &ProblemInstance, tol: f64) -> Result<()> {
    let residual = frobenius(&inst.q.project_q_perp(y));
    if residual > tol * (1.0 + frobenius(y)) {
        return Err(Error::DualOutsideQ { residual });
    }
    Ok(())
}

fn validate_instance(inst: &ProblemInstance) -> Result<()> {
    if !(inst.tau > 0.0) {
        return Err(Error::invalid("tau", "must be > 0"));
    }
    if !(inst.lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be > 0"));
    }
    ensure_square(&inst.m, inst.n)
}

fn ascended(new: f64, old: f64) -> bool {
    new >= old - ASCENT_SLACK * (1.0 + old.abs())
}

/// Solves the program by (accelerated) gradient ascent on the dual,
/// starting from `Ỹ = 0`.
///
/// Stops once `feas <= tol_feas` at the evaluated point and the fixed-point
/// residuals of that primal pair against the updated multiplier are
/// `<= tol_fix`. Reaching `max_iters` returns the last pair with
/// `converged = false`.
pub fn solve(inst: &ProblemInstance, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    validate_instance(inst)?;
    let ev = Evaluator::new(inst);
    let n = inst.n;
    let mut step = opts.step;
    let mut dual_values = Vec::new();
    let mut trace = Vec::new();
    let (mut backtracks, mut restarts) = (0, 0);

    // Last accepted iterate and the one before it (for momentum).
    let mut y_prev = Mat::zeros(n, n);
    let mut current = ev.at(Mat::zeros(n, n));
    let mut t = 1.0_f64;
    let mut last_dual = current.dual;
    let mut prev_pair: Option<(Mat, Mat)> = None;
    let mut iters = 0;

    loop {
        iters += 1;
        let point = current;
        let feas = ev.feas(&point);
        dual_values.push(point.dual);
        if opts.trace {
            let (fix_l, fix_s) = match &prev_pair {
                Some((l, s)) => (
                    frobenius(&(&point.l - l)) / (1.0 + frobenius(&point.l)),
                    frobenius(&(&point.s - s)) / (1.0 + frobenius(&point.s)),
                ),
                None => (
                    frobenius(&point.l) / (1.0 + frobenius(&point.l)),
                    frobenius(&point.s) / (1.0 + frobenius(&point.s)),
                ),
            };
            trace.push(TraceRow {
                iter: iters,
                feas,
                fix_l,
                fix_s,
                dual: point.dual,
            });
        }

        let mut y_next = &point.y + &point.grad * step;
        if iters % Q_CHECK_EVERY == 0 {
            check_in_q(&y_next, inst, Q_CHECK_TOL)?;
            // Both momentum endpoints, or the discarded Q⊥ part returns as velocity.
            y_next = inst.q.project_q(&y_next);
            y_prev = inst.q.project_q(&y_prev);
        }

        if feas <= opts.tol_feas || iters >= opts.max_iters {
            let (fix_l, fix_s) = ev.fix(&point.l, &point.s, &y_next);
            let converged = feas <= opts.tol_feas && fix_l <= opts.tol_fix && fix_s <= opts.tol_fix;
            if converged || iters >= opts.max_iters {
                return Ok(Solution {
                    l: point.l,
                    s: point.s,
                    y: y_next,
                    iters,
                    converged,
                    feas_residual: feas,
                    fix_residual: fix_l.max(fix_s),
                    fix_l,
                    fix_s,
                    dual_values,
                    backtracks,
                    restarts,
                    step,
                    trace,
                });
            }
        }
        if opts.trace {
            prev_pair = Some((point.l.clone(), point.s.clone()));
        }

        if opts.accelerate {
            if !ascended(point.dual, last_dual) {
                restarts += 1;
                t = 1.0;
            }
            last_dual = point.dual;
            let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
            let momentum = (t - 1.0) / t_next;
            let z = &y_next + (&y_next - &y_prev) * momentum;
            y_prev = y_next;
            t = t_next;
            current = ev.at(z);
        } else {
            let mut candidate = ev.at(y_next);
            // Backtrack from `point` until the dual no longer decreases.
            while !ascended(candidate.dual, point.dual) && step > f64::EPSILON {
                backtracks += 1;
                step *= 0.5;
                candidate = ev.at(&point.y + &point.grad * step);
            }
            current = candidate;
        }
    }
}

/// Dual objective `d(Y)` at the scaled multiplier `Ỹ = tau Y`:
/// `⟨Y, P_Q M⟩ - [⟨Y, L*⟩ - g(L*)] - [⟨Y, S*⟩ - h(S*)]`, which simplifies to
/// `(⟨Ỹ, P_Q M⟩ - ||L*||_F²/2 - ||S*||_F²/2) / tau`.
pub fn dual_objective(y: &Mat, inst: &ProblemInstance) -> Result<f64> {
    validate_instance(inst)?;
    ensure_square(y, inst.n)?;
    check_in_q(y, inst, Q_REJECT_TOL)?;
    let ev = Evaluator::new(inst);
    Ok(ev.at(y.clone()).dual)
}

/// `f(L, S) = ||L||_* + lambda ||S||_1 + (||L||_F² + ||S||_F²) / (2 tau)`.
pub fn primal_objective(l: &Mat, s: &Mat, inst: &ProblemInstance) -> Result<f64> {
    validate_instance(inst)?;
    ensure_square(l, inst.n)?;
    ensure_square(s, inst.n)?;
    let (ln, sn) = (frobenius(l), frobenius(s));
    let quad = (ln * ln + sn * sn) / (2.0 * inst.tau);
    Ok(nuclear_norm(l) + inst.lambda * l1_norm(s) + quad)
}

/// Feasibility and fixed-point residuals of `(L, S)` against `Ỹ`.
pub fn kkt_residual(l: &Mat, s: &Mat, y: &Mat, inst: &ProblemInstance) -> Result<KktResidual> {
    validate_instance(inst)?;
    for x in [l, s, y] {
        ensure_square(x, inst.n)?;
    }
    let ev = Evaluator::new(inst);
    let grad = inst.q.project_q(&(&inst.m - l - s));
    let l_star = svt(y, inst.tau)?;
    let s_star = soft_threshold(y, inst.lambda * inst.tau)?;
    Ok(KktResidual {
        feas: frobenius(&grad) / ev.feas_scale,
        fix_l: frobenius(&(l - l_star)) / (1.0 + frobenius(l)),
        fix_s: frobenius(&(s - s_star)) / (1.0 + frobenius(s)),
    })
}

pub fn recovery_error(sol: &Solution, truth: &GroundTruth) -> Result<RecoveryError> {
    recovery_error_of(&sol.l, &sol.s, truth)
}

/// Relative errors and the F1 score of `{|Ŝ_ij| > magnitude/2}` against the
/// true support.
pub fn recovery_error_of(l: &Mat, s: &Mat, truth: &GroundTruth) -> Result<RecoveryError> {
    let n = truth.side();
    ensure_square(l, n)?;
    ensure_square(s, n)?;
    let rel = |x: &Mat, x0: &Mat| frobenius(&(x - x0)) / frobenius(x0).max(1e-30);
    let predicted = SupportSet::of_threshold(s, truth.magnitude / 2.0)?;
    let hits = predicted.iter().filter(|&(i, j)| truth.support.contains(i, j)).count();
    let total = predicted.len() + truth.support.len();
    let support_f1 = if total == 0 {
        1.0
    } else {
        2.0 * hits as f64 / total as f64
    };
    Ok(RecoveryError {
        err_l: rel(l, &truth.l0),
        err_s: rel(s, &truth.s0),
        support_f1,
    })
}

/// `||P_{Q⊥} Ỹ||_F`.
pub fn dual_q_perp_residual(y: &Mat, inst: &ProblemInstance) -> f64 {
    frobenius(&inst.q.project(y))
}
