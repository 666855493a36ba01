use thiserror::Error;

/// Errors surfaced by state construction, the kernel, and the oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("cutoff too small: window captures {captured:.6e} < 1 - {eps:.1e}; raise n_max")]
    CutoffTooSmall { captured: f64, eps: f64 },

    #[error("tolerance unreachable: per-mode windows capture only {captured:.6e} < 1 - {eps:.1e}")]
    UnreachableTolerance { captured: f64, eps: f64 },

    #[error("coefficient recurrence produced non-finite values before normalization")]
    NonFiniteOverflow,

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("term budget exceeded: predicted {predicted} kernel terms > cap {cap}; lower the excitation cutoff or the grid size")]
    BudgetExceeded { predicted: u64, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("quadrature not converged: node doubling still moved the result by {delta:.3e} (tol {tol:.1e})")]
    NotConverged { delta: f64, tol: f64 },

    #[error("operator truncation leaked {leak:.3e} probability into the top of the Fock window")]
    TruncationLeak { leak: f64 },

    #[error("momentum grid aliased: extent {extent:.3} < required {required:.3}")]
    GridAliasing { extent: f64, required: f64 },

    #[error("empty search region: p_min {p_min:.3} is at or beyond the grid extent {p_max:.3}")]
    EmptyRegion { p_min: f64, p_max: f64 },

    #[error("infeasible squeeze: sinh^2(r) = {floor:.4} exceeds the required mean photon number {required:.4}; reduce r or raise the target radius")]
    InfeasibleSqueeze { required: f64, floor: f64 },

    #[error("degenerate target: total mean photon number is zero")]
    DegenerateTarget,
}

pub type Result<T> = std::result::Result<T, Error>;
