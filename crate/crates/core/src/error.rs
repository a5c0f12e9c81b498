use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("generator matrix is rank deficient: singular value {sigma:e} is below {threshold:e}")]
    RankDeficient { sigma: f64, threshold: f64 },

    #[error("subspaces are not transversal: ||P_A P_B|| = {cosine}")]
    NotTransversal { cosine: f64 },

    #[error("{method} did not converge within {iters} iterations (relative residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iters: usize,
        residual: f64,
    },

    #[error("power iteration did not converge: estimate {estimate}, last gap {gap:e}")]
    PowerIteration { estimate: f64, gap: f64 },

    #[error("construction failed: Q-perp residual {q_residual:e}, Pi residual {pi_residual:e}")]
    ConstructionFailed { q_residual: f64, pi_residual: f64 },

    #[error("dual variable is not in Q: ||P_Qperp Y||_F = {residual:e}")]
    DualOutsideQ { residual: f64 },

    #[error("ground truth is required")]
    MissingGroundTruth,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
