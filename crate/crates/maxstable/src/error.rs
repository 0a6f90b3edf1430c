use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular measure: {0}")]
    InvalidMeasure(String),

    #[error("moment constraint violated: coordinate {coord} sums to {sum} (tolerance {tol})")]
    MomentConstraint { coord: usize, sum: f64, tol: f64 },

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quadrature did not reach tolerance {tol} (best error estimate {best})")]
    QuadratureNoConvergence { tol: f64, best: f64 },

    #[error("function `{0}` has no registered derivative, which this operation requires")]
    MissingDerivative(String),

    #[error("function `{0}` is not centered: mean under the stationary law is {1:.6e}")]
    NotCentered(String, f64),

    #[error("truncation produced no Poisson points and no initial condition")]
    EmptyConfiguration,

    #[error("omission probability bound {bound:.3e} exceeds the requested level {level:.3e}; lower the cutoff")]
    CutoffTooCoarse { bound: f64, level: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
