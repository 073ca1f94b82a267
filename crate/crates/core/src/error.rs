use crate::Complex;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The evaluation point is closer to a pole than the evaluator can resolve.
    #[error("{z} lies within {distance:e} of the pole at {pole}")]
    PoleProximity {
        z: Complex,
        pole: Complex,
        distance: f64,
    },

    /// A requested path endpoint is a singular boundary point of the map.
    #[error("{0} is a singular point; no finite value exists there")]
    SingularPoint(Complex),

    #[error("adaptive quadrature on [{a}, {b}] stopped at error estimate {estimate:e} after {subdivisions} subdivisions")]
    Quadrature {
        a: Complex,
        b: Complex,
        estimate: f64,
        subdivisions: usize,
    },

    /// A construction identity failed its residual check.
    #[error("construction check `{check}` failed: residual {residual:e} > {tolerance:e}")]
    Construction {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("boundary trace self-intersects at {count} place(s); failing claims: {failing_claims:?}")]
    SelfIntersection {
        count: usize,
        failing_claims: Vec<u8>,
    },

    #[error("winding number {value} is not within {tolerance} of an integer")]
    NonIntegerWinding { value: f64, tolerance: f64 },
}
