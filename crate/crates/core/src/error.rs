use alloc::string::String;
use core::fmt;

/// Errors surfaced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Grid construction rejected (dimension, size or period out of range).
    InvalidGrid(String),
    /// A parameter outside its documented domain (step size, exponents, ...).
    InvalidParam(String),
    /// Buffer length does not match the grid or window it is paired with.
    ShapeMismatch { expected: usize, got: usize },
    /// Two operands live on different grids or windows.
    GridMismatch,
    /// A non-finite value appeared; `step` is the evolution step that
    /// produced it, when known.
    NonFinite { context: &'static str, step: Option<usize> },
    /// The nonlinearity was requested before three frames of history exist.
    MissingHistory { step: usize },
    /// State timestamp disagrees with the step counter.
    TimeMismatch { expected: f64, got: f64 },
    /// Spatial content above the admissible band `|k| <= pi/(2 tau)`.
    SupportViolation { k_abs: f64, limit: f64 },
    /// Requested diagnostic scales do not fit inside the lattice.
    InfeasibleScales(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            CoreError::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            CoreError::ShapeMismatch { expected, got } => {
                write!(f, "buffer length {got} does not match expected {expected}")
            }
            CoreError::GridMismatch => write!(f, "operands live on different grids"),
            CoreError::NonFinite { context, step } => match step {
                Some(n) => write!(f, "non-finite value in {context} at step {n}"),
                None => write!(f, "non-finite value in {context}"),
            },
            CoreError::MissingHistory { step } => {
                write!(f, "step {step} requires three history frames")
            }
            CoreError::TimeMismatch { expected, got } => {
                write!(f, "state time {got} does not match step time {expected}")
            }
            CoreError::SupportViolation { k_abs, limit } => {
                write!(f, "spatial frequency {k_abs} exceeds admissible band {limit}")
            }
            CoreError::InfeasibleScales(msg) => write!(f, "infeasible scales: {msg}"),
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
