use nalgebra::DVector;

use super::{ensure_square, norm_estimate, unvectorize, CgOptions, Compose, LinearMap, Mat, PowerOptions, Projector};
use crate::{Error, Result};

/// Pairs with `||P_A P_B||` at or above this are treated as overlapping.
pub const TRANSVERSALITY_MARGIN: f64 = 1e-6;

/// Orthogonal projector onto `A ⊕ B` for two transversal subspaces.
///
/// `A` and `B` need not be orthogonal, so `P_{A⊕B} ≠ P_A + P_B`. The
/// projection solves `min_{a∈A, b∈B} ||X - a - b||_F` by conjugate gradients
/// on the normal equations.
#[derive(Debug, Clone)]
pub struct DirectSum<A, B> {
    a: A,
    b: B,
    cosine: f64,
    cg: CgOptions,
}

impl<A: Projector, B: Projector> DirectSum<A, B> {
    /// Estimates `||P_A P_B||` and rejects non-transversal pairs.
    pub fn new(a: A, b: B, power: &PowerOptions) -> Result<Self> {
        let n = a.side();
        if b.side() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                found: (b.side(), b.side()),
            });
        }
        let cosine = norm_estimate(&Compose::new(&a, &b), n, power)?.value;
        if cosine >= 1.0 - TRANSVERSALITY_MARGIN {
            return Err(Error::NotTransversal { cosine });
        }
        Ok(DirectSum {
            a,
            b,
            cosine,
            cg: CgOptions::default(),
        })
    }

    /// Skips the transversality estimate; CG failure is still reported.
    pub fn assume_transversal(a: A, b: B) -> Self {
        DirectSum {
            a,
            b,
            cosine: f64::NAN,
            cg: CgOptions::default(),
        }
    }

    pub fn with_cg(mut self, cg: CgOptions) -> Self {
        self.cg = cg;
        self
    }

    /// Estimated `||P_A P_B||` (NaN when not estimated).
    pub fn cosine(&self) -> f64 {
        self.cosine
    }

    pub fn side(&self) -> usize {
        self.a.side()
    }

    /// `P_{A⊕B} X`.
    pub fn project(&self, x: &Mat) -> Result<Mat> {
        let n = self.side();
        ensure_square(x, n)?;
        let nn = n * n;
        let split = |v: &DVector<f64>| (unvectorize(n, &v.as_slice()[..nn]), unvectorize(n, &v.as_slice()[nn..]));
        let join = |p: &Mat, q: &Mat| {
            let mut v = DVector::zeros(2 * nn);
            v.as_mut_slice()[..nn].copy_from_slice(p.as_slice());
            v.as_mut_slice()[nn..].copy_from_slice(q.as_slice());
            v
        };
        // Normal equations of [P_A P_B] (a, b) ≈ X.
        let rhs = join(&self.a.project(x), &self.b.project(x));
        let out = super::conjugate_gradient(
            |v| {
                let (p, q) = split(v);
                let s = self.a.project(&p) + self.b.project(&q);
                Ok(join(&self.a.project(&s), &self.b.project(&s)))
            },
            &rhs,
            self.cg,
        )?;
        let (p, q) = split(&out.x);
        Ok(self.a.project(&p) + self.b.project(&q))
    }

    /// `X - P_{A⊕B} X`.
    pub fn project_complement(&self, x: &Mat) -> Result<Mat> {
        Ok(x - self.project(x)?)
    }
}

impl<A: Projector, B: Projector> LinearMap for DirectSum<A, B> {
    fn apply(&self, x: &Mat) -> Result<Mat> {
        self.project(x)
    }
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat> {
        self.project(x)
    }
}

impl<A: Projector, B: Projector> LinearMap for &DirectSum<A, B> {
    fn apply(&self, x: &Mat) -> Result<Mat> {
        self.project(x)
    }
    fn apply_adjoint(&self, x: &Mat) -> Result<Mat> {
        self.project(x)
    }
}

/// One-shot `P_{A⊕B} X`, including the transversality check.
pub fn project_direct_sum<A: Projector, B: Projector>(x: &Mat, a: A, b: B) -> Result<Mat> {
    DirectSum::new(a, b, &PowerOptions::default())?.project(x)
}
