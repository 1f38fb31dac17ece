use alloc::string::String;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition or type invariant.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    /// The optimized one-point exponent is only valid for `r >= k_hat`.
    #[error("rate r = {r} lies below k_hat = {k_hat}")]
    RateBelowKhat { r: f64, k_hat: f64 },

    /// Two routes that must agree produced different values.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    /// Picard iteration left the representable range.
    #[error("Picard iteration diverged near t = {time}")]
    Diverged { time: f64 },

    /// A correlation model failed the second-order Taylor domination check.
    #[error("Taylor domination violated by {which} at r = {r}")]
    TaylorViolation { which: &'static str, r: f64 },

    /// Quadrature refinement did not reach the requested agreement.
    #[error("quadrature did not converge: relative change {change} with {panels} panels")]
    Quadrature { change: f64, panels: usize },

    /// Simulation step too coarse for the model.
    #[error("time step {dt} too coarse: dt*(d-1)*beta_N = {value} exceeds 0.1")]
    StepTooCoarse { dt: f64, value: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        reason: reason.into(),
    }
}
