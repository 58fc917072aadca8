use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("validation failed: {what} (residual {residual:.3e})")]
    Validation { what: String, residual: f64 },

    /// The channel is not mixing: eigenvalue 1 is repeated (`multiplicity > 1`) or other
    /// eigenvalues sit on the unit circle (`peripheral` counts all of them, 1 included).
    #[error("degenerate fixed point: unit eigenvalue multiplicity {multiplicity}, {peripheral} peripheral eigenvalues")]
    DegenerateFixedPoint {
        multiplicity: usize,
        peripheral: usize,
    },

    #[error("unsupported range: {0}")]
    UnsupportedRange(String),

    #[error("resource budget exceeded: {what} needs {required}, budget is {budget}")]
    Resource {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    /// No averaged density matrix up to four sites has a kernel. The rank bounds make
    /// this impossible in exact arithmetic, so it points at a tolerance problem.
    #[error("no nontrivial kernel found for nu <= 4 (check tau_rank = {tau:e})")]
    NoKernel { tau: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
