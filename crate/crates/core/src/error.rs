use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the solver. Validation failures are separated from
/// numerical failures so the CLI can map them to distinct exit codes.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma function pole: z = {z} is within {dist:.2e} of a nonpositive integer")]
    GammaPole { z: Complex64, dist: f64 },

    #[error("order too close to an integer for the difference formula: |sin(mu*pi)| = {sin_mag:.2e}")]
    CancellationAlarm { sin_mag: f64 },

    #[error("quadrature failed to reach tolerance: estimated error {est:.2e}, target {target:.2e}")]
    QuadratureFailure { est: f64, target: f64 },

    #[error("tail of an infinite integral not converged: bound {bound:.2e} exceeds {limit:.2e} of the running value")]
    TailNotConverged { bound: f64, limit: f64 },

    #[error("resolvent parameter too close to a zero of the kernel integral: |F_n| = {mag:.2e}")]
    NearKernelZero { mag: f64 },

    #[error("contour point {lambda} leaves the proven resolvent set")]
    ContourOutsideSector { lambda: Complex64 },

    #[error("contour quadrature not converged: doubling nodes moved the L2 norm by {shift:.2e}")]
    ContourNotConverged { shift: f64 },

    #[error("non-finite sample encountered: {0}")]
    NonFinite(String),
}

impl Error {
    /// True for errors that indicate bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter(_))
    }
}
