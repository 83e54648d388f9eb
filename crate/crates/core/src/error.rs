use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed region document; the message names the offending field.
    #[error("invalid region spec: {0}")]
    Spec(String),

    #[error("degenerate polygon: {field} has {count} vertices, at least 3 are required")]
    DegeneratePolygon { field: String, count: usize },

    #[error("chain {chain} is not closed: gap {gap:.3e} after arc {arc}")]
    OpenChain { chain: usize, arc: usize, gap: f64 },

    #[error("self-intersecting boundary: arcs {first} and {second} of chain {chain} cross")]
    SelfIntersecting {
        chain: usize,
        first: usize,
        second: usize,
    },

    #[error("side {side}: radius {radius} is smaller than half the chord length {half_chord}")]
    RadiusTooSmall {
        side: usize,
        radius: f64,
        half_chord: f64,
    },

    #[error("unsupported corner at {vertex}: interior angle {alpha}*pi is a cusp")]
    UnsupportedCorner { vertex: Complex64, alpha: f64 },

    #[error("normalization: {0}")]
    Normalization(String),

    #[error("sample point {0} coincides with the logarithmic singularity of the boundary data")]
    SingularSample(Complex64),

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("evaluation point {0} lies on a singularity of the model")]
    PoleEvaluation(Complex64),

    #[error("invalid geometry: computed modulus {0} is not in (0, 1)")]
    InvalidModulus(f64),

    #[error("invalid map artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
