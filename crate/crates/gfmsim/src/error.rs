//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by controllers, solvers, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates its domain invariants.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// An input lies outside the documented domain of an operation.
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// Steady-state power flow failed to converge.
    #[error("power flow did not converge after {iters} iterations (mismatch {mismatch:.3e} pu)")]
    PowerFlow { iters: usize, mismatch: f64 },

    /// The per-step network solution diverged.
    #[error("network solve diverged at t = {t:.6} s: {detail}")]
    NetworkSolve { t: f64, detail: String },

    /// The implicit integrator's Newton iteration failed.
    #[error("integration step failed at t = {t:.6} s: {detail}")]
    Step { t: f64, detail: String },

    /// A device or its initial condition is inconsistent.
    #[error("device '{device}': {detail}")]
    Device { device: String, detail: String },

    /// Case file parse or validation failure.
    #[error("case file: {0}")]
    Case(String),

    /// Scenario references an unknown bus or device.
    #[error("unknown {kind} '{name}'")]
    UnknownRef { kind: &'static str, name: String },

    /// Invalid input to an analysis routine.
    #[error("analysis: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
