use super::{ensure_square, Mat, Projector, RANK_TOL};
use crate::{Error, Result};

/// Orthonormality tolerance for the factors, in Frobenius norm.
const ORTHO_TOL: f64 = 1e-10;

/// Tangent space `T = { U X^T + Y V^T }` of the rank-`r` matrices at `U Σ V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSpace {
    u: Mat,
    v: Mat,
}

impl TangentSpace {
    pub fn new(u: Mat, v: Mat) -> Result<Self> {
        let n = u.nrows();
        if v.shape() != u.shape() {
            return Err(Error::DimensionMismatch {
                expected: u.shape(),
                found: v.shape(),
            });
        }
        if u.ncols() > n {
            return Err(Error::invalid("rank", "rank exceeds the side length"));
        }
        let r = u.ncols();
        for (name, f) in [("U", &u), ("V", &v)] {
            let resid = (f.transpose() * f - Mat::identity(r, r)).norm();
            if resid > ORTHO_TOL {
                return Err(Error::invalid(
                    "tangent factors",
                    alloc::format!("{name} is not orthonormal (residual {resid:e})"),
                ));
            }
        }
        Ok(TangentSpace { u, v })
    }

    /// Tangent space at `l` from its compact SVD, keeping singular values
    /// above `rel_tol * sigma_max`.
    pub fn from_matrix(l: &Mat, rel_tol: f64) -> Result<Self> {
        let n = l.nrows();
        ensure_square(l, n)?;
        let svd = l.clone().svd(true, true);
        let u = svd.u.expect("requested");
        let v_t = svd.v_t.expect("requested");
        let smax = svd.singular_values.max();
        let keep: alloc::vec::Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
            .collect();
        let uk = Mat::from_fn(n, keep.len(), |i, k| u[(i, keep[k])]);
        let vk = Mat::from_fn(n, keep.len(), |i, k| v_t[(keep[k], i)]);
        Self::new(uk, vk)
    }

    /// Tangent space with the default rank tolerance.
    pub fn of_low_rank(l: &Mat) -> Result<Self> {
        Self::from_matrix(l, RANK_TOL)
    }

    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn side(&self) -> usize {
        self.u.nrows()
    }

    /// `dim T = 2nr - r^2`.
    pub fn dim(&self) -> usize {
        let (n, r) = (self.side(), self.rank());
        2 * n * r - r * r
    }

    /// `U V^T`.
    pub fn uv_t(&self) -> Mat {
        &self.u * self.v.transpose()
    }
}

impl Projector for TangentSpace {
    fn side(&self) -> usize {
        self.u.nrows()
    }

    /// `U U^T X + X V V^T - U U^T X V V^T`.
    fn project(&self, x: &Mat) -> Mat {
        let ut_x = self.u.transpose() * x;
        let x_v = x * &self.v;
        let core = &ut_x * &self.v;
        &self.u * ut_x + (x_v - &self.u * core) * self.v.transpose()
    }

    /// `(I - U U^T) X (I - V V^T)`.
    fn project_complement(&self, x: &Mat) -> Mat {
        let left = x - &self.u * (self.u.transpose() * x);
        &left - (&left * &self.v) * self.v.transpose()
    }
}

/// `P_T X`.
pub fn project_tangent(x: &Mat, t: &TangentSpace) -> Result<Mat> {
    ensure_square(x, t.side())?;
    Ok(t.project(x))
}

/// `P_{T⊥} X`.
pub fn project_tangent_complement(x: &Mat, t: &TangentSpace) -> Result<Mat> {
    ensure_square(x, t.side())?;
    Ok(t.project_complement(x))
}
