use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectroscopic model invalid: {0}")]
    ModelValidity(String),

    /// The constant-or-balanced promise does not hold for this function.
    #[error("function {bits} is neither constant nor balanced")]
    PromiseViolated { bits: String },

    #[error("frequency {freq} cm-1 outside mask window [{low}, {high})")]
    OutOfWindow { freq: f64, low: f64, high: f64 },

    #[error("transitions {first} and {second} both fall in pixel {pixel}")]
    PixelCollision {
        pixel: usize,
        first: usize,
        second: usize,
    },

    #[error("no excitation: every coupling is zero")]
    NoExcitation,

    #[error("integration accuracy lost: norm drift {drift:e} exceeds {limit:e}")]
    IntegrationAccuracy { drift: f64, limit: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("selection error: {0}")]
    Selection(String),

    #[error("malformed table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error: 1 for invalid input, 2 for a
    /// calibration or physics failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoExcitation | Error::IntegrationAccuracy { .. } | Error::Calibration(_) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Table(e.to_string())
    }
}
