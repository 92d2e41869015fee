use std::fmt;

use crate::manifold::MetricKind;

/// Errors shared by all numerical modules of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix dimensions do not match the operation's requirements.
    DimMismatch { expected: usize, got: usize },
    /// A matrix that must be Hermitian positive definite is not.
    NotPd,
    /// An iterative solver did not reach its tolerance within the iteration budget.
    NonConvergence(&'static str),
    /// A scalar function was applied to an eigenvalue outside its domain.
    DomainError(&'static str),
    /// Curve length is not a power of two.
    NotDyadic(usize),
    /// Refinement order exceeds the number of available midpoints.
    OrderTooLarge { order: usize, available: usize },
    /// No precomputed prediction weights for this refinement order.
    UnsupportedOrder(usize),
    /// Fast prediction weights only apply away from the boundary.
    BoundaryLocation { location: usize },
    /// Interpolation abscissae coincide.
    DegenerateGrid,
    /// An operation received an empty input sequence.
    EmptyInput,
    /// Shapes of two pyramids/curves do not line up.
    ShapeMismatch,
    /// Weight vector sums to zero or contains non-finite entries.
    BadWeights,
    /// Multitaper estimate cannot be full rank (B < d).
    RankDeficient { tapers: usize, dim: usize },
    /// Requested more tapers than the time-bandwidth product supports.
    BandwidthTooSmall { tapers: usize, max: f64 },
    /// The requested operation is not defined for this metric.
    UnsupportedMetric(MetricKind),
    /// Series/spectrum lengths are inconsistent.
    LengthMismatch { expected: usize, got: usize },
    /// A test-spectrum specification is invalid.
    InvalidSpec(String),
    /// Input contains NaN or infinite entries.
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotPd => write!(f, "matrix is not positive definite"),
            Error::NonConvergence(what) => write!(f, "{what} did not converge"),
            Error::DomainError(what) => write!(f, "domain error: {what}"),
            Error::NotDyadic(n) => write!(f, "curve length {n} is not a power of two"),
            Error::OrderTooLarge { order, available } => write!(
                f,
                "refinement order {order} exceeds the {available} available midpoints"
            ),
            Error::UnsupportedOrder(n) => {
                write!(f, "no precomputed prediction weights for order {n}")
            }
            Error::BoundaryLocation { location } => {
                write!(f, "location {location} is too close to the boundary")
            }
            Error::DegenerateGrid => write!(f, "interpolation abscissae coincide"),
            Error::EmptyInput => write!(f, "empty input sequence"),
            Error::ShapeMismatch => write!(f, "shape mismatch"),
            Error::BadWeights => write!(f, "weights are non-finite or sum to zero"),
            Error::RankDeficient { tapers, dim } => write!(
                f,
                "{tapers} tapers cannot produce a full-rank {dim}x{dim} estimate"
            ),
            Error::BandwidthTooSmall { tapers, max } => write!(
                f,
                "requested {tapers} tapers but the bandwidth supports at most {max:.1}"
            ),
            Error::UnsupportedMetric(m) => {
                write!(f, "operation is not defined for the {m:?} metric")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::InvalidSpec(msg) => write!(f, "invalid spectrum specification: {msg}"),
            Error::NonFinite => write!(f, "input contains NaN or infinite entries"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
