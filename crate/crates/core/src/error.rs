use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("intertwiner space has dimension {found} at degree {degree}, expected 1")]
    IntertwinerDimension { degree: usize, found: usize },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("modular reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
