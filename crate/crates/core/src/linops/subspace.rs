use nalgebra::DVector;

use super::{ensure_square, unvectorize, vectorize, Mat, Projector, RANK_TOL};
use crate::{Error, Result};

/// The measurement subspace `Q`, stored through an orthonormal basis of `Q⊥`.
///
/// `P_{Q⊥} X = mat(B Bᵀ vec X)` and `P_Q X = X - P_{Q⊥} X`. As a
/// [`Projector`] it projects onto `Q⊥`, the span of the basis; use
/// [`SubspaceProjector::project_q`] or [`super::Complement`] for `P_Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProjector {
    n: usize,
    basis: Mat,
}

impl SubspaceProjector {
    /// `Q = R^{n x n}` (`p = 0`).
    pub fn full(n: usize) -> Self {
        SubspaceProjector {
            n,
            basis: Mat::zeros(n * n, 0),
        }
    }

    /// Wraps a basis that is already orthonormal (checked to 1e-10).
    pub fn from_orthonormal_basis(n: usize, basis: Mat) -> Result<Self> {
        if basis.nrows() != n * n {
            return Err(Error::DimensionMismatch {
                expected: (n * n, basis.ncols()),
                found: basis.shape(),
            });
        }
        let p = basis.ncols();
        let resid = (basis.transpose() * &basis - Mat::identity(p, p)).norm();
        if resid > 1e-10 {
            return Err(Error::invalid(
                "basis",
                alloc::format!("columns are not orthonormal (residual {resid:e})"),
            ));
        }
        Ok(SubspaceProjector { n, basis })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// `p = dim Q⊥`.
    pub fn dim_perp(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Coordinates of `P_{Q⊥} X` in the basis, `Bᵀ vec X`.
    pub fn coefficients(&self, x: &Mat) -> DVector<f64> {
        self.basis.tr_mul(&vectorize(x))
    }

    /// `mat(B c)`.
    pub fn synthesize(&self, c: &DVector<f64>) -> Mat {
        if self.dim_perp() == 0 {
            return Mat::zeros(self.n, self.n);
        }
        unvectorize(self.n, (&self.basis * c).as_slice())
    }

    pub fn project_q_perp(&self, x: &Mat) -> Mat {
        assert_eq!(x.shape(), (self.n, self.n), "subspace projector shape mismatch");
        if self.dim_perp() == 0 {
            return Mat::zeros(self.n, self.n);
        }
        self.synthesize(&self.coefficients(x))
    }

    pub fn project_q(&self, x: &Mat) -> Mat {
        if self.dim_perp() == 0 {
            return x.clone();
        }
        x - self.project_q_perp(x)
    }
}

impl Projector for SubspaceProjector {
    fn side(&self) -> usize {
        self.n
    }
    fn project(&self, x: &Mat) -> Mat {
        self.project_q_perp(x)
    }
    fn project_complement(&self, x: &Mat) -> Mat {
        self.project_q(x)
    }
}

/// Builds the projector for `Q⊥ = span(columns of h)`, `h` being `n² x p`.
///
/// Equivalent to `H (HᵀH)^{-1} Hᵀ` but applied through a thin-QR basis.
pub fn make_subspace_projector(h: &Mat) -> Result<SubspaceProjector> {
    let rows = h.nrows();
    let n = libm::round(libm::sqrt(rows as f64)) as usize;
    if n * n != rows {
        return Err(Error::invalid(
            "H",
            alloc::format!("row count {rows} is not a perfect square"),
        ));
    }
    let p = h.ncols();
    if p == 0 {
        return Ok(SubspaceProjector::full(n));
    }
    if p > rows {
        return Err(Error::invalid("H", "more columns than rows"));
    }
    let sv = h.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let threshold = RANK_TOL * smax;
    if !(smin > threshold) {
        return Err(Error::RankDeficient { sigma: smin, threshold });
    }
    let basis = h.clone().qr().q();
    let proj = SubspaceProjector { n, basis };
    Ok(proj)
}

/// Checked `P_Q X`.
pub fn project_q(x: &Mat, q: &SubspaceProjector) -> Result<Mat> {
    ensure_square(x, q.side())?;
    Ok(q.project_q(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::testutil::*;
    use crate::linops::{frobenius, inner};

    #[test]
    fn p_zero_is_identity() {
        let q = make_subspace_projector(&Mat::zeros(16, 0)).unwrap();
        let mut rng = rng(1);
        let x = gaussian(4, 4, &mut rng);
        assert_eq!(q.project_q(&x), x);
        assert_eq!(q.project_q_perp(&x), Mat::zeros(4, 4));
        assert_eq!(project_q(&x, &q).unwrap(), x);
    }

    #[test]
    fn matches_dense_pseudo_inverse() {
        let (n, p) = (6, 4);
        let mut rng = rng(2);
        let h = gaussian(n * n, p, &mut rng);
        let q = make_subspace_projector(&h).unwrap();
        let gram_inv = (h.transpose() * &h).try_inverse().unwrap();
        let dense = &h * gram_inv * h.transpose();
        for _ in 0..5 {
            let x = gaussian(n, n, &mut rng);
            let expected = unvectorize(n, (&dense * vectorize(&x)).as_slice());
            assert!(frobenius(&(q.project_q_perp(&x) - expected)) < 1e-10);
        }
    }

    #[test]
    fn self_adjoint_and_complementary() {
        let mut rng = rng(3);
        let q = make_subspace_projector(&gaussian(25, 7, &mut rng)).unwrap();
        for _ in 0..20 {
            let x = gaussian(5, 5, &mut rng);
            let y = gaussian(5, 5, &mut rng);
            let lhs = inner(&q.project_q(&x), &y);
            let rhs = inner(&x, &q.project_q(&y));
            assert!((lhs - rhs).abs() < 1e-10 * frobenius(&x) * frobenius(&y));
            let sum = q.project_q(&x) + q.project_q_perp(&x);
            assert!(frobenius(&(sum - &x)) < 1e-12 * frobenius(&x));
        }
    }

    #[test]
    fn rank_deficient_generator_rejected() {
        let mut rng = rng(4);
        let col = gaussian(16, 1, &mut rng);
        let mut h = Mat::zeros(16, 2);
        h.set_column(0, &col.column(0));
        h.set_column(1, &(col.column(0) * 2.0));
        match make_subspace_projector(&h) {
            Err(Error::RankDeficient { sigma, threshold }) => assert!(sigma <= threshold),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        assert!(make_subspace_projector(&Mat::zeros(15, 1)).is_err());
    }

    #[test]
    fn orthonormal_basis_roundtrip() {
        let mut rng = rng(5);
        let q = make_subspace_projector(&gaussian(9, 2, &mut rng)).unwrap();
        let again = SubspaceProjector::from_orthonormal_basis(3, q.basis().clone()).unwrap();
        assert_eq!(again, q);
        assert!(SubspaceProjector::from_orthonormal_basis(3, Mat::from_element(9, 1, 1.0)).is_err());
    }
}
