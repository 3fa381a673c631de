use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no sun-synchronous inclination exists at altitude {altitude_km} km")]
    NoSunSyncSolution { altitude_km: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("uncoverable demand at cell (lat {lat_deg} deg, lst {lst_h} h): {reason}")]
    UncoverableDemand {
        lat_deg: f64,
        lst_h: f64,
        reason: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::NoSunSyncSolution { .. } => "no_sun_sync_solution",
            Error::Infeasible(_) => "infeasible",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::OutOfRange(_) => "out_of_range",
            Error::UncoverableDemand { .. } => "uncoverable_demand",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
