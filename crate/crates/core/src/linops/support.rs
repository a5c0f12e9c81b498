use alloc::vec::Vec;

use super::{ensure_square, Mat, Projector};
use crate::{Error, Result};

/// A set of entry positions in an `n x n` matrix (the support `Omega`).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupportSet {
    n: usize,
    /// Column-major membership mask.
    mask: Vec<bool>,
    len: usize,
}

impl SupportSet {
    /// Builds a support from `(row, col)` pairs; rejects out-of-range and
    /// repeated positions.
    pub fn new(n: usize, positions: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mask = alloc::vec![false; n * n];
        let mut len = 0;
        for (i, j) in positions {
            if i >= n || j >= n {
                return Err(Error::invalid(
                    "support",
                    alloc::format!("position ({i}, {j}) outside a {n}x{n} matrix"),
                ));
            }
            let k = j * n + i;
            if mask[k] {
                return Err(Error::invalid(
                    "support",
                    alloc::format!("position ({i}, {j}) listed twice"),
                ));
            }
            mask[k] = true;
            len += 1;
        }
        Ok(SupportSet { n, mask, len })
    }

    pub fn empty(n: usize) -> Self {
        SupportSet {
            n,
            mask: alloc::vec![false; n * n],
            len: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        SupportSet {
            n,
            mask: alloc::vec![true; n * n],
            len: n * n,
        }
    }

    /// The exact support (nonzero pattern) of a square matrix.
    pub fn of_nonzeros(x: &Mat) -> Result<Self> {
        Self::of_threshold(x, 0.0)
    }

    /// Positions with `|x_ij| > threshold`.
    pub fn of_threshold(x: &Mat, threshold: f64) -> Result<Self> {
        let n = x.nrows();
        ensure_square(x, n)?;
        let mask: Vec<bool> = x.iter().map(|v| v.abs() > threshold).collect();
        let len = mask.iter().filter(|&&b| b).count();
        Ok(SupportSet { n, mask, len })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.mask[j * self.n + i]
    }

    /// Column-major linear indices of the members.
    pub fn linear_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(k, &b)| b.then_some(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.linear_indices().map(move |k| (k % n, k / n))
    }

    /// Values of `x` on the support, in column-major order.
    pub fn gather(&self, x: &Mat) -> Vec<f64> {
        let data = x.as_slice();
        self.linear_indices().map(|k| data[k]).collect()
    }

    /// Inverse of [`SupportSet::gather`]: zeros off the support.
    pub fn scatter(&self, values: &[f64]) -> Mat {
        debug_assert_eq!(values.len(), self.len);
        let mut out = Mat::zeros(self.n, self.n);
        let data = out.as_mut_slice();
        for (k, &v) in self.linear_indices().zip(values) {
            data[k] = v;
        }
        out
    }
}

impl Projector for SupportSet {
    fn side(&self) -> usize {
        self.n
    }

    fn project(&self, x: &Mat) -> Mat {
        assert_eq!(x.shape(), (self.n, self.n), "support projector shape mismatch");
        let mut out = x.clone();
        for (v, &keep) in out.as_mut_slice().iter_mut().zip(&self.mask) {
            if !keep {
                *v = 0.0;
            }
        }
        out
    }

    fn project_complement(&self, x: &Mat) -> Mat {
        assert_eq!(x.shape(), (self.n, self.n), "support projector shape mismatch");
        let mut out = x.clone();
        for (v, &keep) in out.as_mut_slice().iter_mut().zip(&self.mask) {
            if keep {
                *v = 0.0;
            }
        }
        out
    }
}

/// `P_Omega X`: keeps the entries on the support and zeros the rest.
pub fn project_support(x: &Mat, support: &SupportSet) -> Result<Mat> {
    ensure_square(x, support.side())?;
    Ok(support.project(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::testutil::*;

    #[test]
    fn rejects_bad_positions() {
        assert!(SupportSet::new(3, [(0, 3)]).is_err());
        assert!(SupportSet::new(3, [(1, 1), (1, 1)]).is_err());
        let s = SupportSet::new(3, [(0, 1), (2, 2)]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(0, 1) && !s.contains(1, 0));
        assert_eq!(s.iter().collect::<Vec<_>>(), alloc::vec![(0, 1), (2, 2)]);
    }

    #[test]
    fn full_and_empty() {
        let mut rng = rng(2);
        let x = gaussian(4, 4, &mut rng);
        assert_eq!(project_support(&x, &SupportSet::full(4)).unwrap(), x);
        assert_eq!(project_support(&x, &SupportSet::empty(4)).unwrap(), Mat::zeros(4, 4));
        assert!(project_support(&x, &SupportSet::empty(5)).is_err());
    }

    #[test]
    fn idempotent_and_gather_scatter() {
        let mut rng = rng(5);
        let x = gaussian(5, 5, &mut rng);
        let s = SupportSet::new(5, [(0, 0), (3, 1), (4, 4), (2, 3)]).unwrap();
        let once = s.project(&x);
        assert_eq!(s.project(&once), once);
        assert_eq!(s.scatter(&s.gather(&x)), once);
        assert_eq!(once + s.project_complement(&x), x);
    }

    #[test]
    fn support_of_nonzeros() {
        let x = Mat::from_row_slice(2, 2, &[0.0, 1.0, -2.0, 0.0]);
        let s = SupportSet::of_nonzeros(&x).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(0, 1) && s.contains(1, 0));
    }
}
