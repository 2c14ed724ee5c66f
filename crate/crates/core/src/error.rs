use thiserror::Error;

/// Errors raised by grid construction, embeddings and the uncertainty functionals.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("unsupported manifold: {0}")]
    UnsupportedManifold(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("field has zero L2 mass")]
    ZeroMass,
    #[error("field is not L2-normalized on this grid (mass {mass})")]
    NotNormalized { mass: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nodes {i} and {j} form a degenerate pair (geodesic {geodesic}, chord {chord})")]
    DegeneratePair {
        i: usize,
        j: usize,
        geodesic: f64,
        chord: f64,
    },
    #[error("every evaluated curvature configuration was degenerate")]
    DegenerateEmbedding,
    #[error("grid has {0} components; use the disconnected functional")]
    Disconnected(usize),
    #[error("unsupported component count {0} (expected 2..=4)")]
    UnsupportedComponentCount(usize),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
