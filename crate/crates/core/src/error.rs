use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or document violates a documented invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("graph document could not be parsed: {0}")]
    Document(String),

    /// Random-graph generation kept producing disconnected graphs.
    #[error("generator failed to produce a connected graph after {attempts} attempts")]
    Disconnected { attempts: usize },

    /// The potential matrix has a non-positive eigenvalue.
    #[error("unstable network: potential matrix eigenvalue {eigenvalue:.6e} is not positive")]
    Unstable { eigenvalue: f64 },

    #[error("matrix is not symplectic (residual {residual:.3e} > tolerance {tolerance:.1e})")]
    NotSymplectic { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("state violates the uncertainty principle (smallest symplectic eigenvalue {nu:.6})")]
    Uncertainty { nu: f64 },

    /// The probe occupancy reached the thermal reference, so the
    /// logarithm in the excitation-based estimate is undefined.
    #[error("probe saturated: n_S = {n_probe:.6} >= N = {n_thermal:.6} at omega_s = {omega_s}")]
    ProbeSaturated {
        omega_s: f64,
        n_probe: f64,
        n_thermal: f64,
    },

    #[error("no kernel plateau found within horizon {horizon}; set t_max manually")]
    NoPlateau { horizon: f64 },
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
