//! Error types shared by all modules.

use thiserror::Error;

/// Errors surfaced by the algebra, operator, state and solver modules.
#[derive(Debug, Error)]
pub enum NcError {
    /// Parameter outside the admissible domain (e.g. theta*eta >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// A symbol that the requested operation does not accept.
    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),

    /// Bad grid geometry (odd dimension, nonpositive extent, ...).
    #[error("grid error: {0}")]
    Grid(String),

    /// Two objects live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// State norm deviates from 1 beyond tolerance.
    #[error("state not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    /// State cannot be represented on the grid (too narrow, too wide,
    /// or shifted outside the safe region).
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The requested solve is degenerate (e.g. nullifying translation at
    /// epsilon = 0, where the commutator is a c-number).
    #[error("degenerate case: {0}")]
    Degenerate(String),

    /// Iterative solver hit its iteration cap.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Minimization bracket does not contain a sign change of V'.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// Adaptive ODE integrator failed to take a step.
    #[error("step failure at x = {x}: {msg}")]
    StepFailure { x: f64, msg: String },

    /// Not enough oscillation extrema in the requested tail.
    #[error("too few extrema: found {found}, need {need}")]
    TooFewExtrema { found: usize, need: usize },

    /// Zero STFT window.
    #[error("empty window")]
    EmptyWindow,

    /// State mass leaking past the lattice / grid boundary.
    #[error("coverage error: boundary mass {0:.3e}")]
    Coverage(f64),

    /// I/O while reading or writing state files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed state file.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NcError>;
