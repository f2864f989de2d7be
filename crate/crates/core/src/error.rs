use thiserror::Error;

use crate::trajectory::ValidationReport;

/// Errors raised by the design pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gyromagnetic ratio quotient {gamma} is degenerate (|gamma| must differ from 0 and 1)")]
    DegenerateGamma { gamma: f64 },

    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("reduction matrix is singular at t = {t} (|det| = {det:e}, threshold {threshold:e})")]
    SingularReduction { t: f64, det: f64, threshold: f64 },

    #[error("start pair does not lie on the planned start orbit (residual {residual:e})")]
    StartMismatch { residual: f64 },

    #[error("non-finite control sample at t = {t}")]
    NonFinite { t: f64 },

    #[error("achieved and target pairs lie on different orbits (invariant residual {residual:e})")]
    OrbitMismatch { residual: f64 },

    #[error("degenerate spectrum: a factor equals +/- identity")]
    DegenerateSpectrum,

    #[error("no regular split found after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("conjugated basis leaves the control span (residual {residual:e})")]
    BasisNotInvariant { residual: f64 },

    #[error("control basis is not orthonormal under the trace inner product")]
    BasisNotOrthonormal,

    #[error("point is on the singular part (|regularity| = {value:e})")]
    SingularPoint { value: f64 },

    #[error("point is on the boundary of the quotient (|z1| = {modulus})")]
    BoundaryPoint { modulus: f64 },

    #[error("matrix is not special unitary (residual {residual:e})")]
    NotSpecialUnitary { residual: f64 },

    #[error("trajectory failed validation: {}", .0.summary())]
    ValidationFailed(Box<ValidationReport>),

    #[error("malformed control signal: {0}")]
    MalformedSignal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
