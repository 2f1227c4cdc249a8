use num_complex::Complex64;
use thiserror::Error;

use crate::netdsl::ParseError;

/// Errors raised by ring arithmetic, network analysis and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The ring element is a zero divisor (|alpha| ~ |beta|) and has no inverse.
    #[error("ring element is not invertible (|det| = {det:.3e} below tolerance)")]
    NonInvertible { det: f64 },

    /// A matrix inverse exceeded the conditioning threshold.
    #[error("matrix inverse is ill-conditioned (cond ~ {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// Transfer-map evaluation hit a pole or an ill-conditioned inverse.
    #[error("evaluation is singular at s = {s} (cond ~ {cond:.3e})")]
    SingularAt { s: Complex64, cond: f64 },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// Column elimination stalled on a nonzero entry that is a zero divisor.
    #[error("column decomposition stalled on a zero-divisor pivot at ({row}, {col})")]
    DegenerateCoupling { row: usize, col: usize },

    /// Doubled-form eigenvalues could not be grouped into mode pairs.
    #[error("eigenvalue pairing is ambiguous: {0}")]
    AmbiguousPairing(String),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    /// A static component failed its unitarity checks.
    #[error("component is not passive (unitarity defect {defect:.3e})")]
    NotPassive { defect: f64 },

    /// Series products require both systems to share one kernel.
    #[error("memory kernels differ between cascaded systems")]
    KernelMismatch,

    #[error("a complex matrix is not in doubled form (defect {defect:.3e})")]
    NotDoubledForm { defect: f64 },

    #[error("node `{0}` already exists")]
    NodeExists(String),

    #[error("no node named `{0}`")]
    NoSuchNode(String),

    #[error("simulation diverged at t = {t:.3} (state norm {norm:.3e})")]
    UnstableSimulation { t: f64, norm: f64 },

    /// The simulated response has not decayed by the end of the horizon.
    #[error("response has not decayed: {tail_fraction:.3e} of the energy lies in the final 10% of the horizon")]
    InsufficientDecay { tail_fraction: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
