use thiserror::Error;

use crate::kinematics::RobotState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("normalized coordinate s = {0} lies outside [0, 1]")]
    CoordinateOutOfRange(f64),

    #[error("segment index {index} out of range for a {count}-segment robot")]
    SegmentIndex { index: usize, count: usize },

    #[error("expected {expected} {what}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segment {index} collapsed: L + dL = {length} m")]
    Collapsed { index: usize, length: f64 },

    #[error("PCC model requires c1 = 0, segment {segment} has c1 = {c1}")]
    PccCurvatureSlope { segment: usize, c1: f64 },

    #[error("curve has {points} samples on segment {segment}, at least {required} required")]
    DegenerateCurve {
        segment: usize,
        points: usize,
        required: usize,
    },

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("equilibrium solver did not converge: {0}")]
    NotConverged(Box<NonConvergence>),

    #[error("dense rod oracle did not converge after {iterations} iterations (residual {residual:.3e} N)")]
    OracleNotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Error)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature did not reach tolerance {tolerance:.1e} on [{a}, {b}]: \
         estimate {estimate} with error {error:.3e} after {intervals} subintervals"
    )]
    NonConvergence {
        a: f64,
        b: f64,
        tolerance: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
}

/// Failure record of the damped-flow solver: the best state reached and the
/// residual norm after every accepted step.
#[derive(Debug, Clone)]
pub struct NonConvergence {
    pub best_state: RobotState,
    pub best_residual: f64,
    pub steps: usize,
    pub residual_history: Vec<f64>,
}

impl std::fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "best residual {:.3e} after {} steps", self.best_residual, self.steps)
    }
}
