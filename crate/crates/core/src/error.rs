use thiserror::Error;

use crate::Complex;

/// Every failure mode of the numeric kernels, the scanners and the report
/// builders.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole of zeta at s = 1 (s = {0})")]
    PoleAtOne(Complex),
    #[error("ring of radius {radius} around {s} encloses the pole at s = 1")]
    PoleInsideRing { s: Complex, radius: f64 },
    #[error("pole of the gamma function at non-positive integer {0}")]
    PoleAtNonPositiveInteger(Complex),
    #[error("pole of F(s) at {0}")]
    PoleOfF(Complex),
    #[error("{0} is too close to a pole of log F")]
    NearPole(Complex),
    #[error("near-zero denominator in {what} at {s}")]
    NearZeroDenominator { what: &'static str, s: Complex },
    #[error("log-domain exponent {0} overflows")]
    Overflow(f64),
    #[error("log-domain exponent {0} underflows")]
    Underflow(f64),
    #[error("precision loss in {op} at {s}: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    PrecisionLoss { op: &'static str, s: Complex, estimate: f64, tolerance: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid evaluation context: {0}")]
    InvalidContext(String),
    #[error("function vanishes on the tracking path near {point} (|f| = {modulus:e})")]
    ZeroOnPath { point: Complex, modulus: f64 },
    #[error("a zero lies within the resolution of the rectangle boundary near {0}")]
    ZeroOnBoundary(Complex),
    #[error("maximum subdivision depth exceeded on segment {from} -> {to}")]
    MaxSubdivision { from: Complex, to: Complex },
    #[error("winding number {0} is not within the integrality gate")]
    NonIntegerWinding(f64),
    #[error("zero subdivision limit exceeded in cell around {0}")]
    SubdivisionLimit(Complex),
    #[error("located {located} zeros but the strip boundary winds {counted} times")]
    CountMismatch { located: usize, counted: usize },
    #[error("{count} zeros found left of the scan strip (sigma < {sigma_lo})")]
    ZerosOutsideStrip { count: usize, sigma_lo: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors raised when an evaluation cannot meet its accuracy target or a
    /// recursive search runs out of depth, as opposed to invalid input.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::PrecisionLoss { .. }
                | Error::SubdivisionLimit(_)
                | Error::MaxSubdivision { .. }
                | Error::NonIntegerWinding(_)
                | Error::CountMismatch { .. }
        )
    }
}
