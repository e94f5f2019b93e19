//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Errors surfaced by the verified-arithmetic kernels and the pipeline stages.
///
/// Anything `Indeterminate` or `PrecisionExhausted` means a strict inequality
/// could not be certified even after the configured precision escalation; the
/// pipeline treats that as a hard failure rather than guessing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("division by an interval containing zero")]
    DivisionByZero,

    #[error("comparison indeterminate at {bits} bits: {context}")]
    Indeterminate { bits: u32, context: String },

    #[error(
        "precision exhausted after {doublings} doublings (reached {bits} bits): {context}; \
         the input may be rational or the retry cap too low"
    )]
    PrecisionExhausted {
        bits: u32,
        doublings: u32,
        context: String,
    },

    #[error("no qualifying convergent for {label} among the first {scanned} convergents")]
    NoQualifyingConvergent { label: String, scanned: usize },

    #[error("bound scan did not terminate: {0}")]
    ScanDiverged(String),

    #[error("bisection bracket invalid: {0}")]
    Bisection(String),

    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },

    #[error("certificate: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
