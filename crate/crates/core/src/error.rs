use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented invariant. `field` names the offending input.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An argument lies outside the domain of a function (e.g. utility of non-positive wealth).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("interval [{lo}, {hi}] carries zero probability mass")]
    ZeroMass { lo: f64, hi: f64 },

    /// Panel doubling hit its cap before two successive estimates agreed.
    #[error("quadrature did not reach tolerance after {panels} panels (best estimate {best_estimate})")]
    QuadratureTolerance { best_estimate: f64, panels: usize },

    #[error("no feasible targeted type at step {step}: regret level {regret} is below -Z/(2g) = {limit}")]
    Infeasible { step: usize, regret: f64, limit: f64 },

    #[error("covariance matrix is ill-conditioned (condition number {condition:e})")]
    Conditioning { condition: f64 },

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoBracket { lo: f64, hi: f64 },
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
