//! Dense linear-operator core.
//!
//! Matrices are `n x n`, dense, `f64`, column-major. `vec(X)` always means the
//! column-major stacking of `X`, which is also nalgebra's storage order.

mod cg;
mod direct_sum;
mod norm;
mod prox;
mod subspace;
mod support;
mod tangent;

pub use cg::{conjugate_gradient, least_norm, CgOptions, CgOutcome};
pub use direct_sum::{project_direct_sum, DirectSum, TRANSVERSALITY_MARGIN};
pub use norm::{norm_estimate, operator_norm, NormEstimate, PowerOptions};
pub use prox::{soft_threshold, svt, svt_with_values};
pub use subspace::{make_subspace_projector, project_q, SubspaceProjector};
pub use support::{project_support, SupportSet};
pub use tangent::{project_tangent, project_tangent_complement, TangentSpace};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Mat = DMatrix<f64>;

/// Relative threshold below which singular values count as zero.
pub const RANK_TOL: f64 = 1e-12;

pub fn inner(x: &Mat, y: &Mat) -> f64 {
    x.dot(y)
}

pub fn frobenius(x: &Mat) -> f64 {
    x.norm()
}

/// Largest absolute entry, `||X||_inf`.
pub fn max_abs(x: &Mat) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Entrywise l1 norm.
pub fn l1_norm(x: &Mat) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn singular_values(x: &Mat) -> DVector<f64> {
    x.clone().svd(false, false).singular_values
}

pub fn nuclear_norm(x: &Mat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).sum()
}

pub fn spectral_norm(x: &Mat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).max()
}

/// Entrywise sign, with `sgn(0) = 0`.
pub fn sign(x: &Mat) -> Mat {
    x.map(|v| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

pub fn vectorize(x: &Mat) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(n: usize, v: &[f64]) -> Mat {
    Mat::from_column_slice(n, n, v)
}

pub(crate) fn ensure_shape(x: &Mat, rows: usize, cols: usize) -> Result<()> {
    if x.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            expected: (rows, cols),
            found: x.shape(),
        });
    }
    Ok(())
}

pub(crate) fn ensure_square(x: &Mat, n: usize) -> Result<()> {
    ensure_shape(x, n, n)
}

/// An orthogonal projector on `R^{n x n}`. Implementations panic on a
/// shape mismatch; the checked free functions validate first.
pub trait Projector {
    /// Side length of the matrices it acts on.
    fn side(&self) -> usize;

    fn project(&self, x: &Mat) -> Mat;

    fn project_complement(&self, x: &Mat) -> Mat {
        x - self.project(x)
    }
}

impl<P: Projector + ?Sized> Projector for &P {
    fn side(&self) -> usize {
        (**self).side()
    }
    fn project(&self, x: &Mat) -> Mat {
        (**self).project(x)
    }
    fn project_complement(&self, x: &Mat) -> Mat {
        (**self).project_complement(x)
    }
}

/// The projector onto the orthogonal complement of `P`'s range.
#[derive(Debug, Clone, Copy)]
pub struct Complement<P>(pub P);

impl<P: Projector> Projector for Complement<P> {
    fn side(&self) -> usize {
        self.0.side()
    }
    fn project(&self, x: &Mat) -> Mat {
        self.0.project_complement(x)
    }
    fn project_complement(&self, x: &Mat) -> Mat {
        self.0.project(x)
    }
}

/// The zero subspace.
#[derive(Debug, Clone, Copy)]
pub struct ZeroSpace(pub usize);

impl Projector for ZeroSpace {
    fn side(&self) -> usize {
        self.0
    }
    fn project(&self, x: &Mat) -> Mat {
        Mat::zeros(x.nrows(), x.ncols())
    }
}

/// A linear map on `n x n` matrices together with its adjoint.
pub trait LinearMap {
    fn apply(&self, x: &Mat) -> Result<Mat>;
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat>;
}

impl<P: Projector + ?Sized> LinearMap for P {
    fn apply(&self, x: &Mat) -> Result<Mat> {
        Ok(self.project(x))
    }
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat> {
        Ok(self.project(x))
    }
}

/// `outer ∘ inner`.
#[derive(Debug, Clone, Copy)]
pub struct Compose<A, B> {
    pub outer: A,
    pub inner: B,
}

impl<A, B> Compose<A, B> {
    pub fn new(outer: A, inner: B) -> Self {
        Compose { outer, inner }
    }
}

impl<A: LinearMap, B: LinearMap> LinearMap for Compose<A, B> {
    fn apply(&self, x: &Mat) -> Result<Mat> {
        self.outer.apply(&self.inner.apply(x)?)
    }
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat> {
        self.inner.apply_adjoint(&self.outer.apply_adjoint(x)?)
    }
}

/// A linear map given by a pair of closures.
pub struct FnMap<F, G> {
    pub forward: F,
    pub adjoint: G,
}

impl<F, G> core::fmt::Debug for FnMap<F, G> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("FnMap")
    }
}

impl<F, G> LinearMap for FnMap<F, G>
where
    F: Fn(&Mat) -> Mat,
    G: Fn(&Mat) -> Mat,
{
    fn apply(&self, x: &Mat) -> Result<Mat> {
        Ok((self.forward)(x))
    }
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat> {
        Ok((self.adjoint)(x))
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::Mat;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use rand_pcg::Pcg64;

    pub fn rng(seed: u64) -> Pcg64 {
        Pcg64::seed_from_u64(seed)
    }

    pub fn gaussian(rows: usize, cols: usize, rng: &mut Pcg64) -> Mat {
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    /// Orthonormal `n x r` factor.
    pub fn orthonormal(n: usize, r: usize, rng: &mut Pcg64) -> Mat {
        gaussian(n, r, rng).qr().q()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn cauchy_schwarz_holds_on_probes() {
        let mut rng = rng(3);
        for _ in 0..100 {
            let x = gaussian(6, 6, &mut rng);
            let y = gaussian(6, 6, &mut rng);
            assert!(inner(&x, &y).abs() <= frobenius(&x) * frobenius(&y) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn norm_helpers() {
        let x = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        assert_eq!(max_abs(&x), 3.0);
        assert_eq!(l1_norm(&x), 4.0);
        assert!((nuclear_norm(&x) - 4.0).abs() < 1e-14);
        assert!((spectral_norm(&x) - 3.0).abs() < 1e-14);
        assert_eq!(sign(&x), Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let v = vectorize(&x);
        assert_eq!(unvectorize(2, v.as_slice()), x);
    }
}
