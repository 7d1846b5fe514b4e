use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Floquet coefficients did not settle within the largest truncation.
    #[error("Floquet solve did not converge at truncation {truncation} (last residual {residual:e})")]
    Convergence { truncation: usize, residual: f64 },

    /// The requested characteristic exponent is not attained in the selected region.
    #[error("no A with mu = {mu_target} in stability region {region} (scanned A in [{lo}, {hi}])")]
    NotFound {
        mu_target: f64,
        region: String,
        lo: f64,
        hi: f64,
    },

    /// The drive sideband is not resonant with the ion frequency.
    #[error(
        "resonance violated: (mu+2k)*omega_d/2 differs from omega_i' by {relative_error:e} (relative); \
         omega_d must be {required_omega_d:e} rad/s"
    )]
    Resonance {
        required_omega_d: f64,
        relative_error: f64,
    },

    /// The adaptive step collapsed below the representable resolution.
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Any other numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Writing output failed.
    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
