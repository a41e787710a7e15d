use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite at {x:?} (eigenvalues {eigenvalues:?})")]
    NotPositiveDefinite { x: Vec<f64>, eigenvalues: Vec<f64> },
    #[error("metric is not symmetric at {x:?} (asymmetry {asymmetry:e})")]
    NotSymmetric { x: Vec<f64>, asymmetry: f64 },
    #[error("point {x:?} lies within {distance:e} of a chart singularity")]
    ChartSingular { x: Vec<f64>, distance: f64 },
    #[error("point {x:?} is outside the chart domain")]
    OutsideDomain { x: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("density must be positive, found {value} at grid point {index} {x:?}")]
    NonPositiveDensity { index: usize, x: Vec<f64>, value: f64 },
    #[error("non-finite value in field {field} at grid point {index} {x:?}")]
    NonFinite { field: String, index: usize, x: Vec<f64> },
    #[error("density must be positive, got {0}")]
    InvalidDensity(f64),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("incompatible density: {0}")]
    Classification(String),
    #[error("time step {dt} violates the CFL bound; use dt <= {suggested:e}")]
    Cfl { dt: f64, suggested: f64 },
    #[error("marker {index} left the domain at {x:?}")]
    MarkerLost { index: usize, x: Vec<f64> },
    #[error("need at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("series error: {0}")]
    Series(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
