use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("pathloss exponent {0} is not supported (must be greater than 2)")]
    UnsupportedExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature failed to converge: estimate {estimate}, error bound {error_bound}")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    #[error("hypergeometric series did not converge after {terms} terms")]
    SeriesNonConvergence { terms: usize },

    #[error("receiver coincides with the transmitter (zero link distance)")]
    DegenerateDistance,

    #[error("network has no followers")]
    DegenerateNetwork,

    #[error("probability {value} lies outside [0, 1] beyond numerical tolerance")]
    ProbabilityOutOfRange { value: f64 },
}
