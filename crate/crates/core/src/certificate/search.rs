use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::linops::{
    ensure_square, frobenius, least_norm, max_abs, norm_estimate, sign, spectral_norm, CgOptions, Compose, DirectSum,
    Mat, PowerOptions, Projector, SubspaceProjector,
};
use crate::model::{check_alpha_beta, GroundTruth};
use crate::{Error, Result};

/// Normalized residuals at or below this count as satisfied equations.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub cg: CgOptions,
    pub power: PowerOptions,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            cg: CgOptions {
                tol: 1e-12,
                max_iters: 20_000,
            },
            power: PowerOptions {
                tol: 1e-7,
                ..PowerOptions::default()
            },
        }
    }
}

/// A candidate `(W, F, D)` for the optimality conditions
/// `U Vᵀ + W + L0/tau = lambda (sgn(S0) + F + P_Ω D) + S0/tau ∈ Q`,
/// `P_T W = 0`, `P_Ω F = 0`.
#[derive(Debug, Clone)]
pub struct CertificateCandidate {
    pub w: Mat,
    pub f: Mat,
    pub d: Mat,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// Every equation and inequality holds: `(L0, S0)` is the unique solution.
    Certified,
    /// The least-norm candidate violates a bound. Some other certificate may
    /// still exist, so this is not a failure of recovery.
    Inconclusive,
    /// `||P_Ω P_{Γ⊥}|| >= 1/2`: the sufficient condition does not apply.
    PreconditionFailed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Inconclusive => "inconclusive",
            Verdict::PreconditionFailed => "precondition_failed",
        }
    }
}

/// Residuals are divided by `scale = ||U Vᵀ||_F + lambda ||sgn(S0)||_F +
/// ||L0 - S0||_F / tau`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateReport {
    pub equality_residual: f64,
    pub q_membership_residual: f64,
    pub pt_w_residual: f64,
    pub pomega_f_residual: f64,
    pub norm_w: f64,
    pub inf_f: f64,
    pub frob_pd: f64,
    /// Estimated `||P_Ω P_{Γ⊥}||`, `Γ⊥ = Q⊥ ⊕ T`.
    pub transversality: f64,
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cg_iters: usize,
    /// Names of the conditions that failed.
    pub failed: Vec<String>,
    pub verdict: Verdict,
}

/// Searches for the least-Frobenius-norm `(W, F, D)` satisfying the linear
/// optimality conditions, then evaluates `||W|| <= beta`, `||F||_inf <= beta`,
/// `||P_Ω D||_F <= alpha` and `||P_Ω P_{Γ⊥}|| < 1/2`.
pub fn certificate_search(
    truth: &GroundTruth,
    q: &SubspaceProjector,
    tau: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
    opts: &CertificateOptions,
) -> Result<(CertificateCandidate, CertificateReport)> {
    check_alpha_beta(alpha, beta)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda", format!("need 0 < lambda < 1, got {lambda}")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
    }
    let n = truth.side();
    if q.side() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: (q.side(), q.side()),
        });
    }
    ensure_square(&truth.s0, n)?;
    let t = &truth.tangent;
    let omega = &truth.support;
    let uv = t.uv_t();
    let sgn = sign(&truth.s0);

    // Right-hand sides of the equality block and the Q⊥ block.
    let rhs_e = &sgn * lambda + &truth.s0 / tau - &uv - &truth.l0 / tau;
    let rhs_c = -q.coefficients(&(&uv + &truth.l0 / tau));

    let (nn, p, k) = (n * n, q.dim_perp(), omega.len());
    let rows = nn + p + nn + k;
    let mat = |v: &[f64]| Mat::from_column_slice(n, n, v);
    let apply_a = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let xs = x.as_slice();
        let (w, f, d) = (mat(&xs[..nn]), mat(&xs[nn..2 * nn]), mat(&xs[2 * nn..]));
        let e = &w - &f * lambda - omega.project(&d) * lambda;
        let mut out = DVector::zeros(rows);
        out.rows_mut(0, nn).copy_from_slice(e.as_slice());
        out.rows_mut(nn, p).copy_from(&q.coefficients(&w));
        out.rows_mut(nn + p, nn).copy_from_slice(t.project(&w).as_slice());
        out.rows_mut(2 * nn + p, k).copy_from_slice(&omega.gather(&f));
        Ok(out)
    };
    let apply_at = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let ys = y.as_slice();
        let e = mat(&ys[..nn]);
        let c = y.rows(nn, p).clone_owned();
        let tp = mat(&ys[nn + p..2 * nn + p]);
        let fv = &ys[2 * nn + p..];
        let w = &e + q.synthesize(&c) + t.project(&tp);
        let f = omega.scatter(fv) - &e * lambda;
        let d = omega.project(&e) * (-lambda);
        let mut out = DVector::zeros(3 * nn);
        out.rows_mut(0, nn).copy_from_slice(w.as_slice());
        out.rows_mut(nn, nn).copy_from_slice(f.as_slice());
        out.rows_mut(2 * nn, nn).copy_from_slice(d.as_slice());
        Ok(out)
    };
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, nn).copy_from_slice(rhs_e.as_slice());
    rhs.rows_mut(nn, p).copy_from(&rhs_c);
    let sol = least_norm(apply_a, apply_at, &rhs, opts.cg)?;
    let xs = sol.x.as_slice();
    let (w, f, d) = (mat(&xs[..nn]), mat(&xs[nn..2 * nn]), mat(&xs[2 * nn..]));

    let scale = frobenius(&uv) + lambda * frobenius(&sgn) + frobenius(&(&truth.l0 - &truth.s0)) / tau;
    let lhs = &uv + &w + &truth.l0 / tau;
    let rhs_value = (&sgn + &f + omega.project(&d)) * lambda + &truth.s0 / tau;
    let equality_residual = frobenius(&(&lhs - &rhs_value)) / scale;
    let q_membership_residual = frobenius(&q.project_q_perp(&lhs)) / scale;
    let pt_w_residual = frobenius(&t.project(&w)) / scale;
    let pomega_f_residual = frobenius(&omega.project(&f)) / scale;
    let norm_w = spectral_norm(&w);
    let inf_f = max_abs(&f);
    let frob_pd = frobenius(&omega.project(&d));

    let gamma_perp = DirectSum::new(q, t, &opts.power)?.with_cg(opts.cg);
    let transversality = norm_estimate(&Compose::new(omega, &gamma_perp), n, &opts.power)?.value;

    let mut failed = Vec::new();
    let mut require = |ok: bool, name: &str| {
        if !ok {
            failed.push(String::from(name));
        }
    };
    require(equality_residual <= RESIDUAL_TOL, "equality_residual");
    require(q_membership_residual <= RESIDUAL_TOL, "q_membership_residual");
    require(pt_w_residual <= RESIDUAL_TOL, "pt_w_residual");
    require(pomega_f_residual <= RESIDUAL_TOL, "pomega_f_residual");
    require(norm_w <= beta, "norm_w");
    require(inf_f <= beta, "inf_f");
    require(frob_pd <= alpha, "frob_pd");
    let transversal = transversality < 0.5;
    require(transversal, "transversality");
    let verdict = if !transversal {
        Verdict::PreconditionFailed
    } else if failed.is_empty() {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };

    let report = CertificateReport {
        equality_residual,
        q_membership_residual,
        pt_w_residual,
        pomega_f_residual,
        norm_w,
        inf_f,
        frob_pd,
        transversality,
        scale,
        alpha,
        beta,
        cg_iters: sol.iters,
        failed,
        verdict,
    };
    Ok((CertificateCandidate { w, f, d, alpha, beta }, report))
}
