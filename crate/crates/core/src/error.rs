use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported derivative order {order} for {basis} basis")]
    UnsupportedOrder { basis: &'static str, order: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("map is not single-valued; unfolding out of scope (input {input} maps to both {first} and {second})")]
    NotSingleValued { input: f64, first: f64, second: f64 },

    #[error("open loop never crosses negative real axis")]
    NoNyquistCrossing,

    #[error("max root magnitude never reaches 1 for slopes up to {d_hi}")]
    NoStabilityCrossing { d_hi: f64 },

    #[error("SNR requested for a zero-power reference signal")]
    ZeroReferencePower,

    #[error("polynomial has a zero leading coefficient or degree < 1")]
    DegeneratePolynomial,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) get their own exit code in the CLI.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoNyquistCrossing
                | Error::NoStabilityCrossing { .. }
                | Error::DegeneratePolynomial
                | Error::Numerical(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
