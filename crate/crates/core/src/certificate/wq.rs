use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;

use super::{BoundCheck, BoundsReport};
use crate::linops::{
    ensure_square, frobenius, least_norm, max_abs, norm_estimate, spectral_norm, CgOptions, Compose, DirectSum, Mat,
    PowerOptions, Projector, SubspaceProjector, SupportSet, TangentSpace, TRANSVERSALITY_MARGIN,
};
use crate::model::{xi, GroundTruth};
use crate::{Error, Result};

/// Post-hoc constraint tolerance, relative to `xi` (Q⊥ part) and `||W^Q||_F`
/// (Π part).
const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WqMethod {
    /// Least-norm solution of the stacked constraints by CG.
    LeastSquares,
    /// `P_{Π⊥} Σ_{k≥0} (P_{Q⊥} P_Π P_{Q⊥})^k b`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WqOptions {
    pub cg: CgOptions,
    pub power: PowerOptions,
    /// Relative increment at which the series is truncated.
    pub series_tol: f64,
    pub max_terms: usize,
}

impl Default for WqOptions {
    fn default() -> Self {
        WqOptions {
            cg: CgOptions {
                tol: 1e-12,
                max_iters: 20_000,
            },
            power: PowerOptions::default(),
            series_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WqOutput {
    pub w: Mat,
    /// `xi = ||U Vᵀ + L0/tau||_F`.
    pub xi: f64,
    pub method: WqMethod,
    /// CG iterations (least squares) or series terms (Neumann).
    pub iters: usize,
    /// `||P_{Q⊥} W + P_{Q⊥}(U Vᵀ + L0/tau)||_F`.
    pub q_residual: f64,
    /// `||P_Π W||_F`.
    pub pi_residual: f64,
    /// Estimated `||P_{Q⊥} P_Π||`.
    pub transversality: f64,
    /// Ratios of consecutive series increments (Neumann only).
    pub increment_ratios: Vec<f64>,
}

impl WqOutput {
    /// `||P_{Q⊥} P_Π P_{Q⊥}|| = ||P_{Q⊥} P_Π||²`.
    pub fn contraction(&self) -> f64 {
        self.transversality * self.transversality
    }

    /// `||Σ_{k≥0} K^k|| = 1/(1 - ||K||)` for the positive semidefinite
    /// contraction `K = P_{Q⊥} P_Π P_{Q⊥}`.
    pub fn series_norm(&self) -> f64 {
        1.0 / (1.0 - self.contraction())
    }

    /// `||Σ_{k≥1} K^k|| = ||K||/(1 - ||K||)`.
    pub fn tail_series_norm(&self) -> f64 {
        self.contraction() / (1.0 - self.contraction())
    }

    pub fn max_increment_ratio(&self) -> Option<f64> {
        self.increment_ratios.iter().copied().reduce(f64::max)
    }
}

/// Builds `W^Q`, the minimum-Frobenius-norm matrix with
/// `P_{Q⊥} W = -P_{Q⊥}(U Vᵀ + L0/tau)` and `P_Π W = 0`.
///
/// Requires `tau >= ||M||_F` and `||P_{Q⊥} P_Π|| < 1`; both constraints are
/// re-verified on the result.
pub fn build_wq(
    truth: &GroundTruth,
    m: &Mat,
    tau: f64,
    q: &SubspaceProjector,
    method: WqMethod,
    opts: &WqOptions,
) -> Result<WqOutput> {
    let n = truth.side();
    ensure_square(m, n)?;
    if q.side() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: (q.side(), q.side()),
        });
    }
    let m_norm = frobenius(m);
    if !(tau >= m_norm) {
        return Err(Error::invalid(
            "tau",
            format!("need tau >= ||M||_F = {m_norm}, got {tau}"),
        ));
    }
    let t = &truth.tangent;
    let omega = &truth.support;
    let target = t.uv_t() + &truth.l0 / tau;
    let xi_value = xi(truth, tau);

    if q.dim_perp() == 0 {
        return Ok(WqOutput {
            w: Mat::zeros(n, n),
            xi: xi_value,
            method,
            iters: 0,
            q_residual: 0.0,
            pi_residual: 0.0,
            transversality: 0.0,
            increment_ratios: Vec::new(),
        });
    }

    let pi = DirectSum::new(t, omega, &opts.power)?.with_cg(opts.cg);
    let transversality = norm_estimate(&Compose::new(q, &pi), n, &opts.power)?.value;
    if transversality >= 1.0 - TRANSVERSALITY_MARGIN {
        return Err(Error::NotTransversal { cosine: transversality });
    }

    let b = -q.project_q_perp(&target);
    let (w, iters, increment_ratios) = match method {
        WqMethod::LeastSquares => {
            let (w, iters) = least_squares(t, omega, q, &b, opts.cg)?;
            (w, iters, Vec::new())
        }
        WqMethod::Neumann => neumann(&pi, q, &b, opts)?,
    };

    let q_residual = frobenius(&(q.project_q_perp(&w) + q.project_q_perp(&target)));
    let pi_residual = frobenius(&pi.project(&w)?);
    if q_residual > CONSTRAINT_TOL * xi_value || pi_residual > CONSTRAINT_TOL * frobenius(&w) {
        return Err(Error::ConstructionFailed {
            q_residual,
            pi_residual,
        });
    }
    Ok(WqOutput {
        w,
        xi: xi_value,
        method,
        iters,
        q_residual,
        pi_residual,
        transversality,
        increment_ratios,
    })
}

/// `min ||X||_F` s.t. `Bᵀ vec X = Bᵀ vec b`, `P_T X = 0`, `X|_Ω = 0`; the
/// stacked operator only uses `Π⊥ = T⊥ ∩ Ω⊥`, never `P_Π` itself.
fn least_squares(
    t: &TangentSpace,
    omega: &SupportSet,
    q: &SubspaceProjector,
    b: &Mat,
    cg: CgOptions,
) -> Result<(Mat, usize)> {
    let n = t.side();
    let (nn, p, k) = (n * n, q.dim_perp(), omega.len());
    let apply_a = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let xm = Mat::from_column_slice(n, n, x.as_slice());
        let mut out = DVector::zeros(p + nn + k);
        out.rows_mut(0, p).copy_from(&q.coefficients(&xm));
        out.rows_mut(p, nn).copy_from_slice(t.project(&xm).as_slice());
        out.rows_mut(p + nn, k).copy_from_slice(&omega.gather(&xm));
        Ok(out)
    };
    let apply_at = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let c = y.rows(0, p).clone_owned();
        let tp = Mat::from_column_slice(n, n, &y.as_slice()[p..p + nn]);
        let f = &y.as_slice()[p + nn..];
        let x = q.synthesize(&c) + t.project(&tp) + omega.scatter(f);
        Ok(DVector::from_column_slice(x.as_slice()))
    };
    let mut rhs = DVector::zeros(p + nn + k);
    rhs.rows_mut(0, p).copy_from(&q.coefficients(b));
    let out = least_norm(apply_a, apply_at, &rhs, cg)?;
    Ok((Mat::from_column_slice(n, n, out.x.as_slice()), out.iters))
}

fn neumann<A: Projector, B: Projector>(
    pi: &DirectSum<A, B>,
    q: &SubspaceProjector,
    b: &Mat,
    opts: &WqOptions,
) -> Result<(Mat, usize, Vec<f64>)> {
    let mut sum = b.clone();
    let mut term = b.clone();
    let mut prev_norm = frobenius(&term);
    let mut ratios = Vec::new();
    let mut terms = 1;
    while prev_norm > opts.series_tol * frobenius(&sum) {
        if terms >= opts.max_terms {
            return Err(Error::NotConverged {
                method: "Neumann series",
                iters: terms,
                residual: prev_norm / frobenius(&sum),
            });
        }
        term = q.project_q_perp(&pi.project(&term)?);
        let norm = frobenius(&term);
        ratios.push(norm / prev_norm);
        sum += &term;
        prev_norm = norm;
        terms += 1;
    }
    let w = pi.project_complement(&sum)?;
    Ok((w, terms, ratios))
}

/// `||W^Q|| < 1/8` and `||P_{Ω⊥} W^Q||_inf < lambda/8`.
pub fn check_wq(wq: &Mat, omega: &SupportSet, lambda: f64) -> Result<BoundsReport> {
    ensure_square(wq, omega.side())?;
    Ok(BoundsReport {
        checks: alloc::vec![
            BoundCheck::strict("spectral_norm", spectral_norm(wq), 0.125),
            BoundCheck::strict("off_support_max", max_abs(&omega.project_complement(wq)), lambda / 8.0),
        ],
    })
}

/// Bounds expected of the low-rank part `W^L` of a certificate:
/// `||W^L|| < 1/4`, `||P_Ω(U Vᵀ + W^L)||_F < lambda/4` and
/// `||P_{Ω⊥}(U Vᵀ + W^L)||_inf < lambda/4`.
pub fn check_wl(wl: &Mat, t: &TangentSpace, omega: &SupportSet, lambda: f64) -> Result<BoundsReport> {
    ensure_square(wl, omega.side())?;
    ensure_square(wl, t.side())?;
    let total = t.uv_t() + wl;
    Ok(BoundsReport {
        checks: alloc::vec![
            BoundCheck::strict("spectral_norm", spectral_norm(wl), 0.25),
            BoundCheck::strict("on_support_frobenius", frobenius(&omega.project(&total)), lambda / 4.0),
            BoundCheck::strict(
                "off_support_max",
                max_abs(&omega.project_complement(&total)),
                lambda / 4.0
            ),
        ],
    })
}

/// Bounds expected of the sparse part `W^S`: `||W^S|| < 1/8` and
/// `||P_{Ω⊥} W^S||_inf < lambda/8`.
pub fn check_ws(ws: &Mat, omega: &SupportSet, lambda: f64) -> Result<BoundsReport> {
    check_wq(ws, omega, lambda)
}
