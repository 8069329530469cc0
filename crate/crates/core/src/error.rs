use thiserror::Error;

/// Errors raised by the channel model, the bound evaluators and the simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter was non-finite or outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Argument outside the domain of a special function.
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },

    /// The first-hitting-time model needs strictly positive drift.
    #[error("unsupported regime: drift velocity {velocity} must be positive for an inverse Gaussian hitting time")]
    NonPositiveDrift { velocity: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: estimate {estimate} with error estimate {error_estimate}"
    )]
    NoConvergence { estimate: f64, error_estimate: f64 },

    /// The integrand produced NaN or an infinity.
    #[error("integrand is not finite at {at}")]
    NonFiniteIntegrand { at: f64 },

    /// Bisection bracket without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// Moment constraints violate `a >= m^2`.
    #[error("second-moment cap a = {a} is below m^2 = {}", m * m)]
    Constraint { m: f64, a: f64 },

    /// The tabulation grid misses too much of the density's mass.
    #[error("grid up to t_max = {t_max} captures only {captured_mass} of the probability mass")]
    Coverage { t_max: f64, captured_mass: f64 },

    /// Malformed grid specification.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A statistic was requested over no samples.
    #[error("empty sample")]
    EmptySample,

    /// The path-simulation step is too coarse for the requested link.
    #[error("time step {dt} exceeds the resolution limit {limit} (mean hitting time / 1000)")]
    StepTooCoarse { dt: f64, limit: f64 },
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NonFiniteIntegrand { .. }
                | Error::Coverage { .. }
                | Error::NoSignChange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}
