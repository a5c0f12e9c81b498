use alloc::vec::Vec;

use super::Mat;
use crate::{Error, Result};

fn check_threshold(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(
            "t",
            alloc::format!("threshold must be finite and >= 0, got {t}"),
        ));
    }
    Ok(())
}

/// Entrywise soft thresholding, the proximal map of `t ||.||_1`.
pub fn soft_threshold(x: &Mat, t: f64) -> Result<Mat> {
    check_threshold(t)?;
    Ok(shrink(x, t))
}

pub(crate) fn shrink(x: &Mat, t: f64) -> Mat {
    x.map(|v| {
        let m = v.abs() - t;
        if m > 0.0 {
            m.copysign(v)
        } else {
            0.0
        }
    })
}

/// Singular value thresholding, the proximal map of `t ||.||_*`.
pub fn svt(x: &Mat, t: f64) -> Result<Mat> {
    Ok(svt_with_values(x, t)?.0)
}

/// Like [`svt`] but also returns the retained, already shrunk singular values.
pub fn svt_with_values(x: &Mat, t: f64) -> Result<(Mat, Vec<f64>)> {
    check_threshold(t)?;
    Ok(singular_shrink(x, t))
}

pub(crate) fn singular_shrink(x: &Mat, t: f64) -> (Mat, Vec<f64>) {
    let (rows, cols) = x.shape();
    if x.is_empty() {
        return (x.clone(), Vec::new());
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let kept: Vec<(usize, f64)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter_map(|(i, &s)| (s > t).then_some((i, s - t)))
        .collect();
    let mut out = Mat::zeros(rows, cols);
    for &(i, s) in &kept {
        out.ger(s, &u.column(i), &v_t.row(i).transpose(), 1.0);
    }
    (out, kept.into_iter().map(|(_, s)| s).collect())
}
