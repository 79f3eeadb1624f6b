//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by evaluation, integration, and solver routines.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Division by zero, log/sqrt of an invalid argument, and similar,
    /// with a rendering of the offending subexpression.
    #[error("evaluation error: {reason} in `{subexpr}`")]
    Eval { reason: String, subexpr: String },

    /// A field was evaluated with the wrong number of coordinates.
    #[error("arity mismatch: field expects {expected} coordinates, point has {got}")]
    Arity { expected: usize, got: usize },

    /// Operation requires r ≠ 0 (the cone parametrization excludes the vertex).
    #[error("vertex singularity: |r| = {r_abs:.3e} below guard {guard:.3e}")]
    Vertex { r_abs: f64, guard: f64 },

    /// Adaptive step-size control underflowed before reaching the end time.
    #[error("integration failure at t = {t}: step size {h:.3e} underflowed")]
    StepUnderflow { t: f64, h: f64 },

    /// Parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Least-squares fit of structure constants is not trustworthy.
    #[error("ill-conditioned sampling: condition number {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },

    /// Eigenvalue bisection failed to bracket or converge.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
}

impl CoreError {
    pub(crate) fn eval(reason: impl Into<String>, subexpr: impl Into<String>) -> Self {
        CoreError::Eval {
            reason: reason.into(),
            subexpr: subexpr.into(),
        }
    }
}
