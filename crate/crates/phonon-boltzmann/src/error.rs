use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("singular curve: F_- vanishes at (k, k') = ({0}, {1})")]
    SingularCurve(f64, f64),

    #[error("no resonance partner for (k, k') = ({0}, {1})")]
    NoPartner(f64, f64),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("linear solve failure: {0}")]
    LinearSolve(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
