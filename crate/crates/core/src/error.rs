use thiserror::Error;

/// Failures raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conformal factor left the admissible range: v = {v:e} at t = {t}")]
    NonPositiveV { t: f64, v: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("step size {h:e} fell below the floor at t = {t}")]
    StepFloor { t: f64, h: f64 },

    #[error("exceeded {steps} integration steps at t = {t}")]
    MaxSteps { t: f64, steps: usize },

    #[error("no turning point before t = {t_max}")]
    NoTurningPoint { t_max: f64 },

    #[error("no shooting bracket for a = {a}: {detail}")]
    BracketFailure { a: f64, detail: String },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    EigenFailure { sweeps: usize },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
