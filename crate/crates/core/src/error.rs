use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension n = {0} (1 <= n <= 4)")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite sample in component {component} at index {index}")]
    NonFinite { component: usize, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero mode: {0}")]
    ZeroMode(String),

    #[error("sector: {0}")]
    Sector(String),

    #[error("filter bank: {0}")]
    FilterBank(String),

    #[error("spectral leakage outside bank window: relative mass {mass:.3e} exceeds {limit:.1e}")]
    SpectralLeakage { mass: f64, limit: f64 },

    #[error("incompatible boundary flavor: {0}")]
    Flavor(String),

    #[error("not in operator domain: {0}")]
    Domain(String),

    #[error("completeness condition fails for s = {s}, p = {p}, q = {q}, n = {n}")]
    Completeness { s: f64, p: f64, q: f64, n: usize },

    #[error("field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
