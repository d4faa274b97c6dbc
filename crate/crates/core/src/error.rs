use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `E[exp(s X)]` does not exist for the requested exponent.
    #[error(
        "moment E[exp({exponent} X)] does not exist: requires (beta + s)^2 < alpha^2 \
         (alpha = {alpha}, beta = {beta})"
    )]
    MomentNonexistent { exponent: f64, alpha: f64, beta: f64 },

    /// Method-of-moments fit has no NIG solution.
    #[error("moment fit infeasible: {0}")]
    FitInfeasible(String),

    /// A grid or problem setup is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed (non-finite values, solver breakdown).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
