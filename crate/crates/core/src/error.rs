use thiserror::Error;

/// Errors raised anywhere in the demographic pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid age grid: {0}")]
    InvalidGrid(String),

    #[error("invalid life table: {0}")]
    InvalidTable(String),

    #[error("invalid Brass standard: {0}")]
    InvalidStandard(String),

    #[error("life expectancy {target} outside reachable range [{min:.2}, {max:.2}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("age grids differ between life tables")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no root of the characteristic equation: {0}")]
    NoRoot(String),

    #[error("grid cell (tfr {tfr}, e0 {e0})")]
    Cell {
        tfr: f64,
        e0: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("census series out of order: {0}")]
    Ordering(String),

    #[error("data error in {path}: {message}")]
    Data { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn data(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            message: message.into(),
        }
    }
}
