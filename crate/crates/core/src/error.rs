use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma function pole at z = {0}")]
    Pole(f64),

    #[error("{function}: argument {arg} outside the domain")]
    Domain { function: &'static str, arg: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("finite-difference step {h} underflows relative to eps = {eps}")]
    StepUnderflow { h: f64, eps: f64 },

    #[error("outcome {0} has zero probability but non-zero derivative")]
    SingularOutcome(usize),

    #[error("probability at index {0} is zero; the SLD is restricted to the support")]
    ZeroSupport(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("integrator failed to meet tolerance at eta = {eta} (step {step})")]
    StepFailure { eta: f64, step: f64 },

    #[error(
        "integration window too small: scale factor deviates from its asymptote by {deviation:e}"
    )]
    WindowTooSmall { deviation: f64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures caused by the physical parameters rather than by
    /// malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::Pole(_)
                | Error::Degenerate(_)
                | Error::StepUnderflow { .. }
                | Error::SingularOutcome(_)
                | Error::ZeroSupport(_)
                | Error::StepFailure { .. }
                | Error::WindowTooSmall { .. }
        )
    }
}
