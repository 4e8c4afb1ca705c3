use thiserror::Error;

/// Errors raised by the source model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} = {value} outside valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("wavelength {wavelength_um} um sits on a Sellmeier resonance")]
    ResonancePole { wavelength_um: f64 },

    #[error("no guided LP01 mode at {wavelength_um} um (V = {v_number})")]
    Cutoff { wavelength_um: f64, v_number: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no root found: {0}")]
    NotFound(String),

    #[error("birefringence calibration failed: {0}")]
    Calibration(String),

    #[error("half maximum is not crossed inside the grid ({side} side)")]
    UnboundedBandwidth { side: &'static str },

    #[error("dip fit did not converge after {iterations} iterations (residual norm {residual_norm})")]
    FitDiverged {
        iterations: usize,
        residual_norm: f64,
    },

    #[error("no dip found: depth {depth} below 3x noise {noise}")]
    NoDip { depth: f64, noise: f64 },

    #[error("measurement settings are ill-posed: design matrix rank {rank}, null space dimension {null_dim}")]
    IllPosed { rank: usize, null_dim: usize },

    #[error("maximum-likelihood search hit the {evaluations}-evaluation cap (log-likelihood {log_likelihood})")]
    NonConvergence {
        evaluations: usize,
        log_likelihood: f64,
        best: Box<crate::tomography::DensityMatrix>,
    },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("{excluded} of {total} resamples failed to converge")]
    Unreliable { excluded: usize, total: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether this error stems from bad input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
