use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Zone circulation above tolerance; signals a broken update rather than bad data.
    #[error("zone {zone} has discrete circulation {value:e} above tolerance {tolerance:e}")]
    ConstraintViolation { zone: usize, value: f64, tolerance: f64 },

    #[error("constrained Fourier subspace is not invariant (residual {residual:e})")]
    SubspaceNotInvariant { residual: f64 },

    #[error("QR eigenvalue iteration did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("non-finite field value at step {step} (t = {time})")]
    Blowup { step: usize, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConstraintViolation { .. }
                | Error::SubspaceNotInvariant { .. }
                | Error::EigenNoConvergence { .. }
                | Error::Blowup { .. }
        )
    }
}
