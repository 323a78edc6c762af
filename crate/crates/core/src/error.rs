use thiserror::Error;

/// Unified error type for the laboratory.
///
/// Variants that callers are expected to branch on (design search, blow-up,
/// estimator disagreement) carry enough data to report the failure without
/// re-running the computation.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: expected {expected} interior nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("potential is not usable: {0}")]
    BadPotential(String),

    #[error("operator supports {found} bound state(s); two are required")]
    MissingBoundStates { found: usize },

    #[error("tridiagonal system is singular at row {index}")]
    SingularSystem { index: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    ConvergenceFailed { what: String, iterations: usize },

    #[error(
        "branch continuation failed at parameter {param:.6}: residual {residual:.3e} \
         after {iterations} iterations (last good parameter {last_good:.6})"
    )]
    ContinuationFailed {
        param: f64,
        residual: f64,
        iterations: usize,
        last_good: f64,
    },

    #[error("amplitude {value:.6} is outside the continued branch (maximum {max:.6})")]
    OutsideBranch { value: f64, max: f64 },

    #[error("phase is undefined: modulus {modulus:.3e} is below {threshold:.1e}")]
    PhaseUndefined { modulus: f64, threshold: f64 },

    #[error("non-finite field values at t = {t} (blow-up or numerical instability)")]
    BlowUp { t: f64 },

    #[error(
        "relaxation-rate estimators disagree by {disagreement:.2}% (limit {limit:.0}%); \
         refine the grid or enlarge the domain"
    )]
    ResolutionInsufficient { disagreement: f64, limit: f64 },

    #[error("potential design failed: {0}")]
    DesignFailed(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
