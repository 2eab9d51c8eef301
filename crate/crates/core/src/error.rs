//! Error type shared by all solver and imaging modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by field operations, solvers, and image I/O.
///
/// The crate performs no file I/O itself; PGM parsing works on byte
/// slices, so `std::io::Error` never appears here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Grid shapes or kernel sizes are incompatible.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A scalar parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A solver produced a non-finite value at the given time node.
    #[error("divergence: non-finite values at time node {time_node}")]
    Divergence { time_node: usize },

    /// Divergence with the iterate index attached by the outer iteration.
    #[error("divergence: iterate {iterate} produced non-finite values at time node {time_node}")]
    IterateDivergence { iterate: usize, time_node: usize },

    /// A time-stepping scheme produced a non-finite value at the given step.
    #[error("divergence: non-finite values after step {step}")]
    StepDivergence { step: usize },

    /// Evaluation requested at or across a singular point of a closed form.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Malformed PGM data; `offset` is the byte position of the defect.
    #[error("PGM parse error at byte {offset}: {message}")]
    PgmParse { offset: usize, message: String },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
