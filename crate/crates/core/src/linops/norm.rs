use rand_distr::{Distribution, StandardNormal};

use super::{frobenius, LinearMap, Mat};
use crate::rng::{role, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub max_iters: usize,
    /// Relative change of the estimate between iterations at which to stop.
    pub tol: f64,
    /// Seed of the random start matrix.
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            max_iters: 1000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl PowerOptions {
    pub fn with_seed(seed: u64) -> Self {
        PowerOptions {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormEstimate {
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
    /// Relative change over the last iteration.
    pub gap: f64,
}

/// Power iteration on `opᵀ∘op`; never fails on slow convergence, the flag
/// says whether the tolerance was met.
pub fn norm_estimate(op: &dyn LinearMap, n: usize, opts: &PowerOptions) -> Result<NormEstimate> {
    let mut rng = stream(opts.seed, role::POWER_START);
    let mut x = Mat::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    x /= frobenius(&x);
    let mut sigma = 0.0;
    let mut gap = f64::INFINITY;
    for it in 1..=opts.max_iters {
        let y = op.apply(&x)?;
        let next = frobenius(&y);
        if next == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iters: it,
                converged: true,
                gap: 0.0,
            });
        }
        let z = op.apply_adjoint(&y)?;
        let znorm = frobenius(&z);
        gap = (next - sigma).abs() / next;
        sigma = next;
        if gap <= opts.tol {
            return Ok(NormEstimate {
                value: sigma,
                iters: it,
                converged: true,
                gap,
            });
        }
        if znorm == 0.0 {
            break;
        }
        x = z / znorm;
    }
    Ok(NormEstimate {
        value: sigma,
        iters: opts.max_iters,
        converged: false,
        gap,
    })
}

/// `||op|| = sup_{||X||_F = 1} ||op X||_F`, by power iteration.
pub fn operator_norm(op: &dyn LinearMap, n: usize, opts: &PowerOptions) -> Result<f64> {
    let est = norm_estimate(op, n, opts)?;
    if !est.converged {
        return Err(Error::PowerIteration {
            estimate: est.value,
            gap: est.gap,
        });
    }
    Ok(est.value)
}
