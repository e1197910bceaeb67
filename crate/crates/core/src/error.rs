use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integration diverged at t = {t}")]
    IntegrationDiverged { t: f64 },

    #[error("Riccati solution escaped to infinity at t = {t}")]
    RiccatiEscape { t: f64 },

    #[error("Hessian requested at kink m = {m} of an unmollified potential")]
    KinkQuery { m: f64 },

    #[error("shooting did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no stationary point found from {starts} starts")]
    NoStationaryPoint { starts: usize },

    #[error("static reduction not applicable: {0}")]
    InvalidReduction(String),

    #[error("closed-form oracle not applicable: {0}")]
    InvalidOracle(String),

    #[error("stability violation: {ratio} = {value:.4} exceeds {limit}")]
    CflViolation {
        ratio: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("PDE sweep produced a non-finite value at level {level} (t = {t})")]
    PdeDiverged { level: usize, t: f64 },

    #[error("field file: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
