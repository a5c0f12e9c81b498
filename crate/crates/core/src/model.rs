//! Problem instances: seeded generators, incoherence, and the rules for
//! choosing the penalty `tau`.

use alloc::format;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};

use crate::linops::{
    ensure_square, frobenius, make_subspace_projector, max_abs, Mat, Projector, SubspaceProjector, SupportSet,
    TangentSpace, RANK_TOL,
};
use crate::rng::{role, stream};
use crate::{Error, Result};

/// Default `alpha` of the certificate conditions.
pub const DEFAULT_ALPHA: f64 = 3.0 / 8.0;
/// Default `beta` of the certificate conditions.
pub const DEFAULT_BETA: f64 = 5.0 / 8.0;

/// `lambda = 1/sqrt(n)`.
pub fn default_lambda(n: usize) -> f64 {
    1.0 / libm::sqrt(n as f64)
}

/// The planted decomposition behind a generated instance.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub l0: Mat,
    pub s0: Mat,
    /// Exact support of `s0`.
    pub support: SupportSet,
    /// Tangent space at `l0`.
    pub tangent: TangentSpace,
    pub rank: usize,
    /// Bernoulli parameter the support was drawn with.
    pub rho: f64,
    /// Magnitude of the nonzero entries of `s0`.
    pub magnitude: f64,
}

impl GroundTruth {
    /// Derives the support and tangent space from `(l0, s0)`.
    pub fn from_parts(l0: Mat, s0: Mat, rho: f64, magnitude: f64) -> Result<Self> {
        let n = l0.nrows();
        ensure_square(&l0, n)?;
        ensure_square(&s0, n)?;
        let support = SupportSet::of_nonzeros(&s0)?;
        let tangent = TangentSpace::from_matrix(&l0, RANK_TOL)?;
        let rank = tangent.rank();
        Ok(GroundTruth {
            l0,
            s0,
            support,
            tangent,
            rank,
            rho,
            magnitude,
        })
    }

    pub fn side(&self) -> usize {
        self.l0.nrows()
    }
}

/// How `tau` is chosen for a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TauMode {
    /// Data-driven rule [`tau_criterion`].
    Criterion,
    /// Ground-truth rule [`tau_oracle`] with the default `alpha`, `beta`.
    Oracle,
    Explicit(f64),
}

/// Data and measurement model of one recovery problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub n: usize,
    pub m: Mat,
    pub q: SubspaceProjector,
    pub lambda: f64,
    pub tau: f64,
    pub truth: Option<GroundTruth>,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(
        m: Mat,
        q: SubspaceProjector,
        lambda: f64,
        tau: f64,
        truth: Option<GroundTruth>,
        seed: u64,
    ) -> Result<Self> {
        let n = m.nrows();
        ensure_square(&m, n)?;
        if q.side() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                found: (q.side(), q.side()),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
        }
        if let Some(t) = &truth {
            ensure_square(&t.l0, n)?;
            let resid = frobenius(&(&m - &t.l0 - &t.s0));
            if resid > 1e-12 * frobenius(&m).max(f64::MIN_POSITIVE) {
                return Err(Error::invalid("truth", format!("M differs from L0 + S0 by {resid:e}")));
            }
        }
        Ok(ProblemInstance {
            n,
            m,
            q,
            lambda,
            tau,
            truth,
            seed,
        })
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
        }
        let mut out = self.clone();
        out.tau = tau;
        Ok(out)
    }

    /// The observed data `P_Q M`.
    pub fn measured(&self) -> Mat {
        self.q.project_q(&self.m)
    }

    pub fn truth(&self) -> Result<&GroundTruth> {
        self.truth.as_ref().ok_or(Error::MissingGroundTruth)
    }
}

/// `A Bᵀ` with `A, B` `n x r` standard Gaussian factors.
pub fn gen_low_rank(n: usize, r: usize, seed: u64) -> Result<Mat> {
    if r == 0 || r > n {
        return Err(Error::invalid("r", format!("need 1 <= r <= n = {n}, got {r}")));
    }
    let mut left = stream(seed, role::LEFT_FACTOR);
    let mut right = stream(seed, role::RIGHT_FACTOR);
    let a = Mat::from_fn(n, r, |_, _| StandardNormal.sample(&mut left));
    let b = Mat::from_fn(n, r, |_, _| StandardNormal.sample(&mut right));
    Ok(a * b.transpose())
}

/// Bernoulli(`rho`) support with i.i.d. random signs of size `magnitude`.
pub fn gen_sparse(n: usize, rho: f64, magnitude: f64, seed: u64) -> Result<(Mat, SupportSet)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid("rho", format!("need rho in [0, 1], got {rho}")));
    }
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::invalid("magnitude", format!("must be > 0, got {magnitude}")));
    }
    let mut support_rng = stream(seed, role::SUPPORT);
    let mut sign_rng = stream(seed, role::SIGNS);
    let s = Mat::from_fn(n, n, |_, _| {
        let included = support_rng.random_bool(rho);
        let positive = sign_rng.random_bool(0.5);
        match (included, positive) {
            (false, _) => 0.0,
            (true, true) => magnitude,
            (true, false) => -magnitude,
        }
    });
    let support = SupportSet::of_nonzeros(&s)?;
    Ok((s, support))
}

/// The `n² x p` generator `H` with i.i.d. `N(0, 1/n²)` entries.
pub fn gen_measurement_matrix(n: usize, p: usize, seed: u64) -> Result<Mat> {
    if 4 * p >= n * n && p > 0 {
        return Err(Error::invalid("p", format!("need p < n^2/4 = {}, got {p}", n * n / 4)));
    }
    let mut rng = stream(seed, role::MEASUREMENT);
    let sd = 1.0 / n as f64;
    Ok(Mat::from_fn(n * n, p, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * sd
    }))
}

/// A random `p`-dimensional `Q⊥`.
pub fn gen_subspace(n: usize, p: usize, seed: u64) -> Result<SubspaceProjector> {
    if p == 0 {
        return Ok(SubspaceProjector::full(n));
    }
    make_subspace_projector(&gen_measurement_matrix(n, p, seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Incoherence {
    pub mu: f64,
    pub rank: usize,
    /// `(n/r) max_i ||U_i||²`.
    pub row_u: f64,
    /// `(n/r) max_i ||V_i||²`.
    pub row_v: f64,
    /// `(n/r) n ||U Vᵀ||_inf²`.
    pub joint: f64,
}

/// Incoherence parameter of `l0` (robust-PCA definition: the largest of the
/// row-coherences of `U`, `V` and the joint term `n² ||U Vᵀ||²_inf / r`).
pub fn incoherence(l0: &Mat) -> Result<Incoherence> {
    let n = l0.nrows();
    ensure_square(l0, n)?;
    if l0.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("L0", "incoherence of the zero matrix is undefined"));
    }
    let t = TangentSpace::from_matrix(l0, RANK_TOL)?;
    Ok(incoherence_of(&t))
}

pub fn incoherence_of(t: &TangentSpace) -> Incoherence {
    let (n, r) = (t.side() as f64, t.rank());
    let scale = n / r as f64;
    let row_max = |f: &Mat| f.row_iter().map(|row| row.norm_squared()).fold(0.0, f64::max);
    let row_u = scale * row_max(t.u());
    let row_v = scale * row_max(t.v());
    let uv_max = max_abs(&t.uv_t());
    let joint = scale * n * uv_max * uv_max;
    Incoherence {
        mu: row_u.max(row_v).max(joint),
        rank: r,
        row_u,
        row_v,
        joint,
    }
}

/// Data-driven penalty: `tau = 8 sqrt(15) ||M||_F / (3 lambda)`.
pub fn tau_criterion(m: &Mat, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    let norm = frobenius(m);
    if norm == 0.0 {
        return Err(Error::invalid("M", "the data matrix is zero"));
    }
    Ok(8.0 * libm::sqrt(15.0) * norm / (3.0 * lambda))
}

/// Validates the certificate parameters `alpha > 1/4`, `beta > 1/2`,
/// `alpha + beta <= 1`.
pub fn check_alpha_beta(alpha: f64, beta: f64) -> Result<()> {
    if !(beta > 0.5) {
        return Err(Error::invalid("beta", format!("need beta > 1/2, got {beta}")));
    }
    if !(alpha > 0.25) {
        return Err(Error::invalid("alpha", format!("need alpha > 1/4, got {alpha}")));
    }
    if alpha + beta > 1.0 {
        return Err(Error::invalid(
            "alpha + beta",
            format!("need alpha + beta <= 1, got {}", alpha + beta),
        ));
    }
    Ok(())
}

/// The three ground-truth lower bounds on `tau` and the data floor `||M||_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TauBounds {
    /// `||P_{Ω⊥} L0||_inf / ((beta - 1/2) lambda)`.
    pub tau1: f64,
    /// `||P_Ω (L0 - S0)||_F / ((alpha - 1/4) lambda)`.
    pub tau2: f64,
    /// `4 (||P_{Ω⊥} L0||_inf + ||P_Ω (L0 - S0)||_F) / lambda`.
    pub tau3: f64,
    pub data_norm: f64,
}

impl TauBounds {
    pub fn max(&self) -> f64 {
        self.tau1.max(self.tau2).max(self.tau3).max(self.data_norm)
    }
}

pub fn tau_bounds(truth: &GroundTruth, m: &Mat, lambda: f64, alpha: f64, beta: f64) -> Result<TauBounds> {
    check_alpha_beta(alpha, beta)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    ensure_square(m, truth.side())?;
    let omega = &truth.support;
    let gamma = max_abs(&omega.project_complement(&truth.l0));
    let delta = frobenius(&omega.project(&(&truth.l0 - &truth.s0)));
    Ok(TauBounds {
        tau1: gamma / ((beta - 0.5) * lambda),
        tau2: delta / ((alpha - 0.25) * lambda),
        tau3: 4.0 * (gamma + delta) / lambda,
        data_norm: frobenius(m),
    })
}

/// Ground-truth penalty `max(tau1, tau2, tau3, ||M||_F)`.
pub fn tau_oracle(truth: &GroundTruth, m: &Mat, lambda: f64, alpha: f64, beta: f64) -> Result<f64> {
    let b = tau_bounds(truth, m, lambda, alpha, beta)?;
    let tau = b.max();
    if alpha == DEFAULT_ALPHA && beta == DEFAULT_BETA {
        // At (3/8, 5/8) tau3 never binds and the rule reads
        // max(8 gamma / lambda, 8 delta / lambda, ||M||_F).
        let gamma = b.tau1 * (beta - 0.5) * lambda;
        let delta = b.tau2 * (alpha - 0.25) * lambda;
        let simple = (8.0 * gamma / lambda).max(8.0 * delta / lambda).max(b.data_norm);
        debug_assert!((simple - tau).abs() <= 1e-12 * tau);
    }
    Ok(tau)
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstanceParams {
    pub n: usize,
    pub r: usize,
    pub rho: f64,
    pub p: usize,
    pub magnitude: f64,
    pub seed: u64,
    pub tau_mode: TauMode,
}

impl InstanceParams {
    pub fn new(n: usize, r: usize, rho: f64, p: usize, seed: u64) -> Self {
        InstanceParams {
            n,
            r,
            rho,
            p,
            magnitude: 1.0,
            seed,
            tau_mode: TauMode::Criterion,
        }
    }

    pub fn tau_mode(mut self, mode: TauMode) -> Self {
        self.tau_mode = mode;
        self
    }
}

/// Generates `M = L0 + S0`, `Q⊥`, `lambda = 1/sqrt(n)` and `tau`.
pub fn build_instance(params: &InstanceParams) -> Result<ProblemInstance> {
    let InstanceParams {
        n,
        r,
        rho,
        p,
        magnitude,
        seed,
        tau_mode,
    } = *params;
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let l0 = gen_low_rank(n, r, seed)?;
    let (s0, _) = gen_sparse(n, rho, magnitude, seed)?;
    let q = gen_subspace(n, p, seed)?;
    let m = &l0 + &s0;
    let truth = GroundTruth::from_parts(l0, s0, rho, magnitude)?;
    let lambda = default_lambda(n);
    let tau = match tau_mode {
        TauMode::Criterion => tau_criterion(&m, lambda)?,
        TauMode::Oracle => tau_oracle(&truth, &m, lambda, DEFAULT_ALPHA, DEFAULT_BETA)?,
        TauMode::Explicit(t) => t,
    };
    ProblemInstance::new(m, q, lambda, tau, Some(truth), seed)
}

/// Measured sides of the norm inequalities relating the planted pair to `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormChain {
    pub m_frob: f64,
    /// `||P_Ω L0||_F`, bounded by `(sqrt(3)/3) ||M||_F`.
    pub omega_l0: f64,
    /// `||P_Ω (L0 - S0)||_F`, bounded by `(sqrt(15)/3) ||M||_F`.
    pub omega_diff: f64,
    /// `||L0||_F`, bounded by `(sqrt(3)/3 + 2) ||M||_F`.
    pub l0_frob: f64,
    /// `xi = ||U Vᵀ + L0 / tau||_F`, bounded by `r + sqrt(3)/3 + 2`.
    pub xi: f64,
    pub rank: usize,
}

impl NormChain {
    pub fn omega_l0_bound(&self) -> f64 {
        libm::sqrt(3.0) / 3.0 * self.m_frob
    }
    pub fn omega_diff_bound(&self) -> f64 {
        libm::sqrt(15.0) / 3.0 * self.m_frob
    }
    pub fn l0_bound(&self) -> f64 {
        (libm::sqrt(3.0) / 3.0 + 2.0) * self.m_frob
    }
    pub fn xi_bound(&self) -> f64 {
        self.rank as f64 + libm::sqrt(3.0) / 3.0 + 2.0
    }
    pub fn omega_l0_holds(&self) -> bool {
        self.omega_l0 <= self.omega_l0_bound()
    }
    pub fn omega_diff_holds(&self) -> bool {
        self.omega_diff <= self.omega_diff_bound()
    }
    pub fn l0_holds(&self) -> bool {
        self.l0_frob <= self.l0_bound()
    }
    pub fn xi_holds(&self) -> bool {
        self.xi <= self.xi_bound()
    }
}

/// `xi = ||U Vᵀ + L0 / tau||_F`.
pub fn xi(truth: &GroundTruth, tau: f64) -> f64 {
    frobenius(&(truth.tangent.uv_t() + &truth.l0 / tau))
}

pub fn norm_chain(truth: &GroundTruth, m: &Mat, tau: f64) -> Result<NormChain> {
    ensure_square(m, truth.side())?;
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
    }
    let omega = &truth.support;
    Ok(NormChain {
        m_frob: frobenius(m),
        omega_l0: frobenius(&omega.project(&truth.l0)),
        omega_diff: frobenius(&omega.project(&(&truth.l0 - &truth.s0))),
        l0_frob: frobenius(&truth.l0),
        xi: xi(truth, tau),
        rank: truth.rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::singular_values;

    #[test]
    fn low_rank_rank_and_determinism() {
        let l = gen_low_rank(12, 12, 3).unwrap();
        assert!(singular_values(&l).min() > 0.0);
        let a = gen_low_rank(20, 3, 42).unwrap();
        let b = gen_low_rank(20, 3, 42).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(TangentSpace::of_low_rank(&a).unwrap().rank(), 3);
        assert!(gen_low_rank(5, 6, 0).is_err());
        assert!(gen_low_rank(5, 0, 0).is_err());
    }

    #[test]
    fn sparse_extremes() {
        let (s, omega) = gen_sparse(6, 0.0, 1.0, 1).unwrap();
        assert_eq!(s, Mat::zeros(6, 6));
        assert!(omega.is_empty());
        let (s, omega) = gen_sparse(6, 1.0, 2.5, 1).unwrap();
        assert_eq!(omega.len(), 36);
        assert!(s.iter().all(|&v| v == 2.5 || v == -2.5));
        assert!(s.iter().any(|&v| v < 0.0) && s.iter().any(|&v| v > 0.0));
        assert!(gen_sparse(6, 1.5, 1.0, 1).is_err());
        assert!(gen_sparse(6, -0.1, 1.0, 1).is_err());
    }

    #[test]
    fn sparse_support_concentrates() {
        // Binomial(n², rho): |count - rho n²| <= 3 sd in at least 99 of 100 seeds.
        let (n, rho) = (100usize, 0.05);
        let nn = (n * n) as f64;
        let sd = (nn * rho * (1.0 - rho)).sqrt();
        let ok = (0..100)
            .filter(|&seed| {
                let (_, omega) = gen_sparse(n, rho, 1.0, seed).unwrap();
                (omega.len() as f64 - rho * nn).abs() <= 3.0 * sd
            })
            .count();
        assert!(ok >= 99, "{ok}/100");
    }

    #[test]
    fn subspace_dimension_and_regime() {
        let q = gen_subspace(8, 0, 1).unwrap();
        assert_eq!(q.dim_perp(), 0);
        let q = gen_subspace(8, 10, 1).unwrap();
        // trace of P_{Q⊥} over the canonical basis equals p
        let mut trace = 0.0;
        for j in 0..8 {
            for i in 0..8 {
                let mut e = Mat::zeros(8, 8);
                e[(i, j)] = 1.0;
                trace += q.project_q_perp(&e)[(i, j)];
            }
        }
        assert!((trace - 10.0).abs() < 1e-10);
        assert!(gen_subspace(8, 16, 1).is_err());
    }

    #[test]
    fn measurement_entries_have_variance_one_over_n_squared() {
        let (n, p) = (20usize, 10usize);
        let h = gen_measurement_matrix(n, p, 5).unwrap();
        let count = h.len() as f64;
        let mean = h.sum() / count;
        let var = h.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        let target = 1.0 / (n * n) as f64;
        assert!((var - target).abs() <= 0.1 * target, "{var} vs {target}");
    }

    #[test]
    fn incoherence_examples() {
        let n = 10;
        let mut spike = Mat::zeros(n, n);
        spike[(0, 0)] = 1.0;
        let inc = incoherence(&spike).unwrap();
        assert_eq!(inc.rank, 1);
        assert!((inc.row_u - 10.0).abs() < 1e-12);
        assert!((inc.row_v - 10.0).abs() < 1e-12);
        assert!((inc.joint - 100.0).abs() < 1e-10);
        assert!((inc.mu - 100.0).abs() < 1e-10);

        let flat = Mat::from_element(n, n, 1.0);
        let inc = incoherence(&flat).unwrap();
        assert!((inc.mu - 1.0).abs() < 1e-12, "{:?}", inc);

        assert!(incoherence(&Mat::zeros(3, 3)).is_err());
    }

    #[test]
    fn incoherence_matches_entrywise_recomputation() {
        let l = gen_low_rank(50, 5, 11).unwrap();
        let inc = incoherence(&l).unwrap();
        let t = TangentSpace::of_low_rank(&l).unwrap();
        let (u, v) = (t.u(), t.v());
        let (n, r) = (50.0, 5.0);
        let mut ru: f64 = 0.0;
        let mut rv: f64 = 0.0;
        let mut uv: f64 = 0.0;
        for i in 0..50 {
            let (mut su, mut sv) = (0.0, 0.0);
            for k in 0..5 {
                su += u[(i, k)] * u[(i, k)];
                sv += v[(i, k)] * v[(i, k)];
            }
            ru = ru.max(su);
            rv = rv.max(sv);
            for j in 0..50 {
                let mut e = 0.0;
                for k in 0..5 {
                    e += u[(i, k)] * v[(j, k)];
                }
                uv = uv.max(e.abs());
            }
        }
        let mu = (n / r * ru).max(n / r * rv).max(n / r * n * uv * uv);
        assert!((inc.mu - mu).abs() <= 1e-12 * mu);
        assert!(inc.mu.is_finite());
    }

    #[test]
    fn tau_criterion_values() {
        let m = Mat::from_row_slice(1, 1, &[3.0]);
        let tau = tau_criterion(&m, 0.1).unwrap();
        assert!((tau - 80.0 * 15f64.sqrt()).abs() < 1e-9);
        assert!((tau - 309.839).abs() < 1e-3);
        let unit = Mat::from_row_slice(1, 1, &[1.0]);
        let tau = tau_criterion(&unit, default_lambda(100)).unwrap();
        assert!((tau - 103.280).abs() < 1e-3);
        let scaled = tau_criterion(&(&m * 4.0), 0.1).unwrap();
        assert!((scaled - 4.0 * 80.0 * 15f64.sqrt()).abs() < 1e-9);
        assert!(tau_criterion(&m, 0.0).is_err());
        assert!(tau_criterion(&m, -1.0).is_err());
    }

    #[test]
    fn tau_oracle_degenerate_sparse_part() {
        let l0 = gen_low_rank(10, 1, 4).unwrap();
        let truth = GroundTruth::from_parts(l0.clone(), Mat::zeros(10, 10), 0.0, 1.0).unwrap();
        let lambda = 0.3;
        let (alpha, beta) = (0.3, 0.6);
        let tau = tau_oracle(&truth, &l0, lambda, alpha, beta).unwrap();
        let inf = max_abs(&l0);
        let expected = (inf / ((beta - 0.5) * lambda))
            .max(0.0)
            .max(4.0 * inf / lambda)
            .max(frobenius(&l0));
        assert!((tau - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn tau_oracle_at_default_parameters() {
        let inst = build_instance(&InstanceParams::new(20, 2, 0.1, 0, 3)).unwrap();
        let truth = inst.truth.as_ref().unwrap();
        let b = tau_bounds(truth, &inst.m, inst.lambda, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
        let gamma = max_abs(&truth.support.project_complement(&truth.l0));
        let delta = frobenius(&truth.support.project(&(&truth.l0 - &truth.s0)));
        assert!((b.tau1 - 8.0 * gamma / inst.lambda).abs() <= 1e-12 * b.tau1);
        assert!((b.tau2 - 8.0 * delta / inst.lambda).abs() <= 1e-12 * b.tau2);
    }

    #[test]
    fn alpha_beta_constraints_named() {
        let err = check_alpha_beta(0.5, 0.6).unwrap_err();
        assert!(alloc::format!("{err}").contains("alpha + beta <= 1"));
        assert!(check_alpha_beta(0.2, 0.7).is_err());
        assert!(check_alpha_beta(0.3, 0.5).is_err());
        assert!(check_alpha_beta(DEFAULT_ALPHA, DEFAULT_BETA).is_ok());
    }

    #[test]
    fn build_instance_invariants() {
        let params = InstanceParams::new(60, 2, 0.05, 60, 9);
        let a = build_instance(&params).unwrap();
        let b = build_instance(&params).unwrap();
        assert_eq!(a.m.as_slice(), b.m.as_slice());
        assert_eq!(a.q.basis().as_slice(), b.q.basis().as_slice());
        let t = a.truth.as_ref().unwrap();
        assert!(frobenius(&(&a.m - &t.l0 - &t.s0)) <= 1e-14 * frobenius(&a.m));
        assert_eq!(t.rank, 2);
        assert_eq!(SupportSet::of_nonzeros(&t.s0).unwrap(), t.support);
        assert!((a.lambda - 1.0 / 60f64.sqrt()).abs() < 1e-15);
        assert!(a.tau >= frobenius(&a.m));

        let rank_one = build_instance(&InstanceParams::new(15, 1, 0.0, 0, 2)).unwrap();
        assert_eq!(TangentSpace::of_low_rank(&rank_one.m).unwrap().rank(), 1);
    }

    #[test]
    fn oracle_never_exceeds_criterion_when_chain_holds() {
        let mut violations = 0;
        for seed in 0..100 {
            let inst = build_instance(&InstanceParams::new(30, 2, 0.05, 30, seed)).unwrap();
            let t = inst.truth.as_ref().unwrap();
            let chain = norm_chain(t, &inst.m, inst.tau).unwrap();
            let oracle = tau_oracle(t, &inst.m, inst.lambda, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
            if chain.omega_diff_holds() && oracle > inst.tau * (1.0 + 1e-9) {
                violations += 1;
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn instance_validation() {
        let q = SubspaceProjector::full(3);
        assert!(ProblemInstance::new(Mat::zeros(3, 3), q.clone(), 0.0, 1.0, None, 0).is_err());
        assert!(ProblemInstance::new(Mat::zeros(3, 3), q.clone(), 1.0, 0.0, None, 0).is_err());
        assert!(ProblemInstance::new(Mat::zeros(4, 4), q, 1.0, 1.0, None, 0).is_err());
    }
}
