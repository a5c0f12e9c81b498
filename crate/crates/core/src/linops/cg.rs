use nalgebra::DVector;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `||b - A x|| / ||b||`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-12,
            max_iters: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: DVector<f64>,
    pub iters: usize,
    /// Relative residual, recomputed from scratch at exit.
    pub residual: f64,
}

/// Conjugate gradients for a symmetric positive semidefinite operator.
///
/// Singular systems are fine as long as `b` lies in the range. The recursive
/// residual is checked against a freshly computed one on exit; if they have
/// drifted apart the iteration restarts from the current point.
pub fn conjugate_gradient<F>(mut apply: F, b: &DVector<f64>, opts: CgOptions) -> Result<CgOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let bnorm = b.norm();
    let mut x = DVector::zeros(b.len());
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x,
            iters: 0,
            residual: 0.0,
        });
    }
    let target = opts.tol * bnorm;
    let mut iters = 0;
    let mut r = b.clone();
    let mut restart_norm = f64::INFINITY;
    loop {
        let mut p = r.clone();
        let mut rr = r.norm_squared();
        while iters < opts.max_iters && libm::sqrt(rr) > target {
            let ap = apply(&p)?;
            let pap = p.dot(&ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            x.axpy(alpha, &p, 1.0);
            r.axpy(-alpha, &ap, 1.0);
            let rr_next = r.norm_squared();
            p = &r + (rr_next / rr) * p;
            rr = rr_next;
            iters += 1;
        }
        let true_r = b - apply(&x)?;
        let residual = true_r.norm() / bnorm;
        if residual <= opts.tol {
            return Ok(CgOutcome { x, iters, residual });
        }
        let true_norm = true_r.norm();
        if iters >= opts.max_iters || true_norm >= 0.5 * restart_norm {
            // Out of budget, or the last restart did not halve the residual.
            return Err(Error::NotConverged {
                method: "conjugate gradient",
                iters,
                residual,
            });
        }
        restart_norm = true_norm;
        r = true_r;
    }
}

/// Minimum-norm solution of a consistent system `A x = b` (CG on `A Aᵀ y = b`,
/// `x = Aᵀ y`).
pub fn least_norm<F, G>(mut apply_a: F, mut apply_at: G, b: &DVector<f64>, opts: CgOptions) -> Result<CgOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    G: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let inner = conjugate_gradient(|y| apply_a(&apply_at(y)?), b, opts)?;
    let x = apply_at(&inner.x)?;
    Ok(CgOutcome {
        x,
        iters: inner.iters,
        residual: inner.residual,
    })
}
