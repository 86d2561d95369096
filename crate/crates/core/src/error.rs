use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("supercritical coupling: |e f| = {coupling} must be below n = {n}")]
    SupercriticalCoupling { coupling: f64, n: u32 },

    #[error("rest mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("charges e = {e} and f = {f} do not form an attractive pair (e f < 0); set allow_repulsive to override")]
    NotAttractive { e: f64, f: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coverage infeasible: {0}")]
    InfeasibleCoverage(String),

    #[error("point {point:?} is not on the boundary of roundel {id} (off by {distance:e})")]
    NotOnBoundary {
        point: [f64; 3],
        id: usize,
        distance: f64,
    },

    #[error("site {site:?} has no neighbour along axis {axis}")]
    BoundarySite { site: [usize; 4], axis: usize },

    #[error("field format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
