use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input lies outside the domain of the operation (pole, singular matrix,
    /// non-unitary frame, parameters violating a constraint).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid arguments (mismatched radii, too few samples).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A factorization did not reach the requested tolerance at the given
    /// truncation degree.
    #[error("truncation error: residual {residual:.3e} exceeds tolerance {tol:.1e} at degree {degree}")]
    Truncation { residual: f64, tol: f64, degree: usize },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    /// Failure while evaluating one point of a surface grid.
    #[error("grid point (t index {t_index}, rho index {rho_index}): {source}")]
    GridPoint {
        t_index: usize,
        rho_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Residual carried by a truncation failure, looking through grid-point
    /// wrappers.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::Truncation { residual, .. } => Some(*residual),
            Error::GridPoint { source, .. } => source.residual(),
            _ => None,
        }
    }
}
