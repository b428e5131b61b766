use thiserror::Error;

/// Errors produced by state construction, dynamics and the reproduction harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("measurement outcome has probability {0:e}; conditional state undefined")]
    DegenerateOutcome(f64),

    #[error("amplitude norm {0} exceeds 1")]
    NormViolation(f64),

    #[error("angle out of range: {0}")]
    AngleRange(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dispersive quantities are undefined at zero detuning")]
    ZeroDetuning,

    #[error("value never crosses the bound on the sampled horizon")]
    NoCrossing,

    #[error("Fock truncation violated: {0}")]
    Truncation(String),

    #[error("integration step rejected: error rate {rate:e} per unit time exceeds {limit:e}")]
    StepRejected { rate: f64, limit: f64 },

    #[error("unknown initial state `{0}`")]
    UnknownState(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("table error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
