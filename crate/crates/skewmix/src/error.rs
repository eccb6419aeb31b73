//! Crate-wide error type.

use std::error;
use std::fmt;

/// Errors produced by parameter validation, moment queries, and numerical
/// routines.
///
/// Missing moments are always reported through [`Error::MomentNotFinite`]
/// with the minimal condition that would make the moment finite; no routine
/// ever substitutes a sentinel value such as `NaN` for an absent moment.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Two inputs that must share a dimension do not.
    DimensionMismatch {
        expected: usize,
        got: usize,
        what: &'static str,
    },
    /// A matrix that must be symmetric is not, beyond tolerance.
    NotSymmetric { max_asymmetry: f64 },
    /// A matrix that must be symmetric positive definite has a non-positive
    /// eigenvalue (relative to its largest eigenvalue).
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// A shape vector `delta` lies outside the admissible open unit ball in
    /// the metric of the correlation matrix.
    DeltaOutOfRange { norm_sq: f64 },
    /// A requested mixing moment does not exist; the string states the
    /// minimal parameter condition under which it would (e.g. "requires nu > 4").
    MomentNotFinite { required: String },
    /// An operation needs the mixing variable's density, but the mixing
    /// distribution does not provide one.
    DensityUnavailable { mixing: &'static str },
    /// An operation needs to draw mixing variates, but the mixing
    /// distribution does not provide a sampler.
    SamplerUnavailable { mixing: &'static str },
    /// A matrix that must be invertible is singular or too ill-conditioned.
    IllConditioned { cond: f64, limit: f64 },
    /// The two scatter matrices of an invariant-coordinate problem are
    /// proportional, so no skew direction can be identified.
    DegenerateScatterPair { spread: f64 },
    /// An iterative routine failed to converge.
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// A bracketing search could not find a sign change.
    NoBracket { what: &'static str, limit: f64 },
    /// An input value is outside its documented domain.
    InvalidArgument { what: String },
    /// Not enough observations for the requested estimator.
    TooFewSamples { n: usize, needed: usize },
}

/// Coarse classification of an [`Error`], shared by every front end that
/// needs an exit or status code: malformed input, an operation the
/// distribution does not support, or a numerical failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The caller's input is malformed or outside its documented domain.
    InvalidInput,
    /// The operation is undefined for this distribution (missing moments,
    /// unavailable density/sampler, unidentifiable skew direction).
    Unsupported,
    /// A numerical procedure failed (conditioning, convergence).
    Numerical,
}

impl Error {
    /// The coarse class this error belongs to.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::NotSymmetric { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DeltaOutOfRange { .. }
            | Error::InvalidArgument { .. } => ErrorClass::InvalidInput,
            Error::MomentNotFinite { .. }
            | Error::DensityUnavailable { .. }
            | Error::SamplerUnavailable { .. }
            | Error::DegenerateScatterPair { .. }
            | Error::TooFewSamples { .. } => ErrorClass::Unsupported,
            Error::IllConditioned { .. }
            | Error::NoConvergence { .. }
            | Error::NoBracket { .. } => ErrorClass::Numerical,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                expected,
                got,
                what,
            } => write!(f, "{what}: expected dimension {expected}, got {got}"),
            Error::NotSymmetric { max_asymmetry } => write!(
                f,
                "matrix is not symmetric (max |A - A^T| entry = {max_asymmetry:e})"
            ),
            Error::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "matrix is not positive definite (smallest eigenvalue = {min_eigenvalue:e})"
            ),
            Error::DeltaOutOfRange { norm_sq } => write!(
                f,
                "delta lies outside the admissible region (delta' Obar^-1 delta = {norm_sq} >= 1)"
            ),
            Error::MomentNotFinite { required } => {
                write!(f, "mixing moment is not finite: {required}")
            }
            Error::DensityUnavailable { mixing } => {
                write!(f, "{mixing} mixing provides no density on (0, inf)")
            }
            Error::SamplerUnavailable { mixing } => {
                write!(f, "{mixing} mixing provides no sampler")
            }
            Error::IllConditioned { cond, limit } => write!(
                f,
                "matrix too ill-conditioned (estimate {cond:e} exceeds limit {limit:e})"
            ),
            Error::DegenerateScatterPair { spread } => write!(
                f,
                "scatter matrices are proportional (relative eigenvalue spread {spread:e}); \
                 no skew direction is identifiable"
            ),
            Error::NoConvergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::NoBracket { what, limit } => write!(
                f,
                "{what}: no sign change found while expanding the bracket up to {limit:e}"
            ),
            Error::InvalidArgument { what } => write!(f, "invalid argument: {what}"),
            Error::TooFewSamples { n, needed } => {
                write!(f, "estimator needs at least {needed} observations, got {n}")
            }
        }
    }
}

impl error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
