use thiserror::Error;

/// Errors raised by the precoder design pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Smallest Gram eigenvalue fell below the relative floor. The RF factor is
    /// (numerically) rank deficient and the caller should draw a new one.
    #[error("singular Gram matrix (lambda_min = {min:e}, lambda_max = {max:e})")]
    SingularGram { min: f64, max: f64 },

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Fisher information matrix is singular; parameters are not identifiable")]
    SingularFim,

    /// The precoder carries no information about the angle at this state.
    #[error("angle error bound is degenerate (Schur complement {0:e})")]
    DegenerateBound(f64),

    #[error("too few pilots: {pilots} pilots for {ues} UEs (need at least 2 per UE)")]
    TooFewPilots { pilots: usize, ues: usize },

    #[error("pilot count {pilots} is not divisible by 2 x {ues} UEs")]
    IndivisiblePilots { pilots: usize, ues: usize },

    #[error("grid point {index} is unidentifiable even at uniform power")]
    InfeasibleGrid { index: usize },

    #[error("baseband factor is zero")]
    ZeroBb,

    #[error("target precoder has no component in the column space of the RF factor")]
    ZeroProjection,

    #[error("quantization bound violated: excess {excess:e} > allowance {allowance:e}")]
    BoundViolation { excess: f64, allowance: f64 },

    #[error("RF initialization failed after {0} draws (Gram matrix stayed singular)")]
    InitializationFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
