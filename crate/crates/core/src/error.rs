use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("CFL number {cfl:.6} exceeds the stability bound {bound:.6}")]
    CflViolation { cfl: f64, bound: f64 },

    #[error("inadmissible geometry: T = {t_final} must exceed 4r = {four_r:.6}")]
    InadmissibleGeometry { t_final: f64, four_r: f64 },

    #[error("non-finite solution value detected at time step {step}")]
    NonFinite { step: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sinogram needs at least two angles, got {0}")]
    DegenerateSinogram(usize),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("measurement at angle {angle_deg} deg, eps index {index} failed: {source}")]
    Measurement {
        angle_deg: f64,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pointwise solve at x0 = ({x1:.4}, {x2:.4}) failed: {source}")]
    PointSolve {
        x1: f64,
        x2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("trace cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
