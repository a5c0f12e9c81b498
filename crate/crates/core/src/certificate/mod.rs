//! Dual certificates for exact recovery and empirical checks of the operator
//! norm bounds they rely on.
//!
//! `Π = T ⊕ Ω` is the sum of the tangent space at `L0` and the support of
//! `S0`; `Γ⊥ = Q⊥ ⊕ T`.

mod angles;
mod search;
mod wq;

use alloc::string::String;
use alloc::vec::Vec;

pub use angles::{
    check_dim_condition, check_direct_sum_angle, check_tangent_angle, DimConditionReport, DirectSumAngleReport,
    TangentAngleReport,
};
pub use search::{certificate_search, CertificateCandidate, CertificateOptions, CertificateReport, Verdict};
pub use wq::{build_wq, check_wl, check_wq, check_ws, WqMethod, WqOptions, WqOutput};

/// One measured quantity against a strict upper bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub(crate) fn strict(name: &str, value: f64, bound: f64) -> Self {
        BoundCheck {
            name: name.into(),
            value,
            bound,
            holds: value < bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}
