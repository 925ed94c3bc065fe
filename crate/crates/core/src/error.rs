use thiserror::Error;

/// Errors raised across the toolkit. Each variant maps to a stable CLI exit code.
#[derive(Debug, Error)]
pub enum MaslovError {
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("essential spectrum at lambda = {lambda}: {detail}")]
    EssentialSpectrum { lambda: f64, detail: String },

    #[error("non-hyperbolic within tolerance at lambda = {0}")]
    NonHyperbolic(f64),

    #[error("near eigenvalue at lambda = {lambda} (|D| = {evans:e})")]
    NearEigenvalue { lambda: f64, evans: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("methods disagree: {0}")]
    Disagreement(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl MaslovError {
    /// Exit code contract: 2 usage/precondition, 3 domain, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            MaslovError::UnknownProblem(_)
            | MaslovError::InvalidParameter(_)
            | MaslovError::Precondition(_)
            | MaslovError::NearEigenvalue { .. }
            | MaslovError::Io(_)
            | MaslovError::Csv(_) => 2,
            MaslovError::EssentialSpectrum { .. } | MaslovError::NonHyperbolic(_) => 3,
            MaslovError::Geometry(_) | MaslovError::Solver(_) | MaslovError::Disagreement(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, MaslovError>;
