use alloc::format;
use alloc::vec::Vec;

use crate::linops::{
    norm_estimate, vectorize, Compose, DirectSum, Mat, PowerOptions, Projector, SubspaceProjector, SupportSet,
    TangentSpace, TRANSVERSALITY_MARGIN,
};
use crate::{Error, Result};

/// Relative slack granted to a measured norm over its bound, covering the
/// power-iteration error of the estimates on both sides.
const ESTIMATE_SLACK: f64 = 1e-6;
/// Largest side for which the dimension condition is checked by dense rank.
pub const DENSE_RANK_MAX_N: usize = 20;

fn estimate(op: &dyn crate::linops::LinearMap, n: usize, power: &PowerOptions) -> Result<f64> {
    Ok(norm_estimate(op, n, power)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirectSumAngleReport {
    /// `||P_{S1} P_{S2}||`.
    pub a12: f64,
    /// `||P_{S2} P_{S3}||`.
    pub a23: f64,
    /// `||P_{S3} P_{S1}||`.
    pub a31: f64,
    /// `||P_{S1⊕S2} P_{S3}||`.
    pub measured: f64,
    /// `sqrt((a23² + a31²) / (1 - a12))`.
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Compares `||P_{S1⊕S2} P_{S3}||` with `sqrt((a23² + a31²)/(1 - a12))`,
/// where `a_ij = ||P_{Si} P_{Sj}||`.
pub fn check_direct_sum_angle<A, B, C>(s1: A, s2: B, s3: C, power: &PowerOptions) -> Result<DirectSumAngleReport>
where
    A: Projector,
    B: Projector,
    C: Projector,
{
    let n = s1.side();
    if s2.side() != n || s3.side() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: (s2.side().max(s3.side()), s2.side().max(s3.side())),
        });
    }
    let a12 = estimate(&Compose::new(&s1, &s2), n, power)?;
    let a23 = estimate(&Compose::new(&s2, &s3), n, power)?;
    let a31 = estimate(&Compose::new(&s3, &s1), n, power)?;
    for (name, a) in [("a12", a12), ("a23", a23), ("a31", a31)] {
        if a >= 1.0 - TRANSVERSALITY_MARGIN {
            return Err(Error::PreconditionFailed(format!(
                "pairwise cosine {name} = {a} is not below 1"
            )));
        }
    }
    let sum = DirectSum::assume_transversal(&s1, &s2);
    let measured = estimate(&Compose::new(&sum, &s3), n, power)?;
    let bound = libm::sqrt((a23 * a23 + a31 * a31) / (1.0 - a12));
    Ok(DirectSumAngleReport {
        a12,
        a23,
        a31,
        measured,
        bound,
        margin: bound - measured,
        holds: measured <= bound * (1.0 + ESTIMATE_SLACK) + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentAngleReport {
    /// `||P_{Q⊥} P_T||`.
    pub measured: f64,
    /// `8 (sqrt(p) + sqrt(2 n r)) / n`; vacuous above 1 but still reported.
    pub bound: f64,
    pub holds: bool,
}

/// Compares `||P_{Q⊥} P_T||` with `8 (sqrt(p) + sqrt(2 n r)) / n`.
pub fn check_tangent_angle(
    q: &SubspaceProjector,
    t: &TangentSpace,
    power: &PowerOptions,
) -> Result<TangentAngleReport> {
    let n = q.side();
    if t.side() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: (t.side(), t.side()),
        });
    }
    let p = q.dim_perp();
    if 4 * p >= n * n && p > 0 {
        return Err(Error::PreconditionFailed(format!(
            "need p < n^2/4, got p = {p}, n = {n}"
        )));
    }
    let measured = if p == 0 {
        0.0
    } else {
        estimate(&Compose::new(q, t), n, power)?
    };
    let (nf, r) = (n as f64, t.rank() as f64);
    let bound = 8.0 * (libm::sqrt(p as f64) + libm::sqrt(2.0 * nf * r)) / nf;
    Ok(TangentAngleReport {
        measured,
        bound,
        holds: measured <= bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimConditionReport {
    pub dim_q_perp: usize,
    pub dim_t: usize,
    pub dim_omega: usize,
    /// `||P_{Q⊥} P_T||`, `||P_T P_Ω||`, `||P_Ω P_{Q⊥}||`.
    pub pairwise: [f64; 3],
    /// Rank of the stacked bases (dense check, small `n` only).
    pub stacked_rank: Option<usize>,
    /// Only the pairwise norms were checked.
    pub partial: bool,
    pub holds: bool,
}

/// Checks `dim(Q⊥ ⊕ T ⊕ Ω) = dim Q⊥ + dim T + dim Ω`: pairwise norms below
/// `1 - 1e-8` and, for `n <= 20`, the rank of the stacked bases.
pub fn check_dim_condition(
    q: &SubspaceProjector,
    t: &TangentSpace,
    omega: &SupportSet,
    power: &PowerOptions,
) -> Result<DimConditionReport> {
    let n = q.side();
    if t.side() != n || omega.side() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: (t.side(), t.side()),
        });
    }
    let (p, dt, k) = (q.dim_perp(), t.dim(), omega.len());
    let expected = p + dt + k;
    let pairwise = [
        estimate(&Compose::new(q, t), n, power)?,
        estimate(&Compose::new(t, omega), n, power)?,
        estimate(&Compose::new(omega, q), n, power)?,
    ];
    let pairwise_ok = pairwise.iter().all(|&a| a < 1.0 - 1e-8);
    let fits = expected <= n * n;
    let stacked_rank = (n <= DENSE_RANK_MAX_N && fits).then(|| stacked_rank(q, t, omega));
    let holds = fits && pairwise_ok && stacked_rank.map_or(true, |r| r == expected);
    Ok(DimConditionReport {
        dim_q_perp: p,
        dim_t: dt,
        dim_omega: k,
        pairwise,
        stacked_rank,
        partial: stacked_rank.is_none(),
        holds,
    })
}

/// Numerical rank of `[B_{Q⊥} | spanning set of T | e_ij for ij ∈ Ω]`.
fn stacked_rank(q: &SubspaceProjector, t: &TangentSpace, omega: &SupportSet) -> usize {
    let n = q.side();
    let r = t.rank();
    let mut cols: Vec<Mat> = Vec::new();
    for j in 0..q.dim_perp() {
        cols.push(Mat::from_column_slice(n, n, q.basis().column(j).as_slice()));
    }
    for k in 0..r {
        for j in 0..n {
            let mut m = Mat::zeros(n, n);
            m.set_column(j, &t.u().column(k));
            cols.push(m);
        }
        for i in 0..n {
            let mut m = Mat::zeros(n, n);
            m.set_row(i, &t.v().column(k).transpose());
            cols.push(m);
        }
    }
    for (i, j) in omega.iter() {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = 1.0;
        cols.push(m);
    }
    let mut stacked = Mat::zeros(n * n, cols.len());
    for (c, m) in cols.iter().enumerate() {
        stacked.set_column(c, &vectorize(m));
    }
    let sv = stacked.svd(false, false).singular_values;
    let smax = sv.max();
    sv.iter().filter(|&&s| s > 1e-10 * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::SubspaceProjector;
    use crate::model::{build_instance, InstanceParams};

    fn coordinate_subspace(n: usize, idx: &[usize]) -> SubspaceProjector {
        let mut b = Mat::zeros(n * n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            b[(i, c)] = 1.0;
        }
        SubspaceProjector::from_orthonormal_basis(n, b).unwrap()
    }

    #[test]
    fn orthogonal_triple_has_zero_bound() {
        let a = coordinate_subspace(3, &[0, 1]);
        let b = coordinate_subspace(3, &[2, 3]);
        let c = coordinate_subspace(3, &[4, 5]);
        let rep = check_direct_sum_angle(&a, &b, &c, &PowerOptions::default()).unwrap();
        assert_eq!(
            (rep.a12, rep.a23, rep.a31, rep.measured, rep.bound),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert!(rep.holds);
    }

    #[test]
    fn nested_subspace_rejected() {
        let a = coordinate_subspace(3, &[0, 1]);
        let b = coordinate_subspace(3, &[2, 3]);
        let c = coordinate_subspace(3, &[0]);
        assert!(matches!(
            check_direct_sum_angle(&a, &b, &c, &PowerOptions::default()),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn random_triples_satisfy_bound() {
        for seed in 0..5 {
            let inst = build_instance(&InstanceParams::new(16, 1, 0.05, 10, seed)).unwrap();
            let t = inst.truth().unwrap();
            let rep = check_direct_sum_angle(&t.tangent, &t.support, &inst.q, &PowerOptions::default()).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn tangent_angle_bound_values() {
        let inst = build_instance(&InstanceParams::new(10, 1, 0.05, 0, 1)).unwrap();
        let t = &inst.truth().unwrap().tangent;
        let rep = check_tangent_angle(&inst.q, t, &PowerOptions::default()).unwrap();
        assert_eq!(rep.measured, 0.0);
        assert!((rep.bound - 8.0 * 20f64.sqrt() / 10.0).abs() < 1e-12);
        assert!(rep.holds);
        let big = coordinate_subspace(4, &[0, 1, 2, 3]);
        let t4 = TangentSpace::new(
            Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
            Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        assert!(check_tangent_angle(&big, &t4, &PowerOptions::default()).is_err());
    }

    #[test]
    fn dim_condition_on_orthogonal_toys_and_full_support() {
        let n = 4;
        let t = TangentSpace::new(
            Mat::from_column_slice(n, 1, &[1.0, 0.0, 0.0, 0.0]),
            Mat::from_column_slice(n, 1, &[1.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        // T lives in row 0 and column 0; pick Ω and Q⊥ from the rest.
        let omega = SupportSet::new(n, [(1, 1), (2, 2)]).unwrap();
        let q = coordinate_subspace(n, &[3 * n + 3, 2 * n + 3]);
        let rep = check_dim_condition(&q, &t, &omega, &PowerOptions::default()).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.stacked_rank, Some(2 + 7 + 2));
        assert!(!rep.partial);

        let full = SupportSet::full(n);
        let rep = check_dim_condition(&q, &t, &full, &PowerOptions::default()).unwrap();
        assert!(!rep.holds);
    }
}
