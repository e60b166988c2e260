use thiserror::Error;

use crate::model::BoundaryKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs an odd number of points, got {0}")]
    EvenPointCount(usize),

    #[error("finite-difference order must be a positive even integer, got {0}")]
    InvalidOrder(usize),

    #[error("order-{order} stencils need at least {min} grid points, got {n_points}")]
    TooFewPoints {
        order: usize,
        n_points: usize,
        min: usize,
    },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grids differ ({left} vs {right} points, orders {left_order} vs {right_order})")]
    GridMismatch {
        left: usize,
        right: usize,
        left_order: usize,
        right_order: usize,
    },

    #[error("tabulated abscissa {index} is {found}, grid point is {expected}")]
    AbscissaMismatch {
        index: usize,
        expected: f64,
        found: f64,
    },

    #[error("periodic boundary conditions need V(+1) = V(-1), got {left} and {right}")]
    NonPeriodicPotential { left: f64, right: f64 },

    #[error("invalid physical scales: {0}")]
    InvalidScales(&'static str),

    #[error("state index must start at 1, got {0}")]
    InvalidStateIndex(usize),

    #[error("requested {requested} states but the operator only supports {max}")]
    TooManyStates { requested: usize, max: usize },

    #[error("eigenvalue decomposition failed: {0}")]
    Decomposition(String),

    #[error("inverse iteration did not converge for eigenvalue {eigenvalue} (residual {residual:e})")]
    NoConvergence { eigenvalue: f64, residual: f64 },

    #[error("complex eigenvalue pair {re} ± {im}i among the lowest states")]
    ComplexPair { re: f64, im: f64 },

    #[error("state is not normalised: ½∫|ψ|² = {0}")]
    NotNormalized(f64),

    #[error("state norm {0:e} is too small to normalise")]
    ZeroNorm(f64),

    #[error("{0}")]
    BoundaryMismatch(String),

    #[error("operation requires {expected:?} boundary conditions, state has {found:?}")]
    WrongBoundary {
        expected: BoundaryKind,
        found: BoundaryKind,
    },

    #[error("operation needs the time derivative of the state")]
    MissingTimeDerivative,
}
