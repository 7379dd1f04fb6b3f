use alloc::string::String;

/// Errors produced by model construction, solvers and validators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation needs a feature the model does not have.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The model violates an admissibility condition for the martingale property.
    #[error("inadmissible model: {0}")]
    Inadmissible(String),

    /// The ODE integrator could not advance.
    #[error("solver failure at v = {at}: {reason}")]
    Solver { at: f64, reason: String },

    /// A point lies outside a tabulated grid.
    #[error("{value} outside grid range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    /// A time does not coincide with a node of the simulation grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;

macro_rules! inadmissible {
    ($($arg:tt)*) => { $crate::Error::Inadmissible(alloc::format!($($arg)*)) };
}
pub(crate) use inadmissible;
