//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by measure construction, transforms, and experiments.
#[derive(Debug, Error)]
pub enum Error {
    /// All raw weights are zero, so no probability measure can be formed.
    #[error("zero total mass: {0}")]
    ZeroMass(String),

    /// Two sequences that must have equal length do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A coordinate, weight, or parameter is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A scalar argument lies outside its admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The matrix part of an affine map is (numerically) singular.
    #[error("singular matrix: |det| = {det:e} <= 1e-12")]
    SingularMatrix { det: f64 },

    /// A projection has (numerically) vanishing standard deviation, so it
    /// cannot be standardized. Carries the offending direction angle.
    #[error("degenerate projection at angle {theta} rad (std {std:e} < eps)")]
    DegenerateProjection { theta: f64, std: f64 },

    /// The measure's support is (numerically) contained in a line.
    #[error("collinear support: {0}")]
    CollinearSupport(String),

    /// A sampler or run configuration is invalid.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A file could not be parsed. Carries the location of the defect.
    #[error("parse error at {0}")]
    ParseError(String),

    /// A referenced file does not exist.
    #[error("missing file: {0}")]
    MissingFile(String),

    /// The file exists but is not in a supported format.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Training data contains only one class.
    #[error("single class: all {0} examples share one label")]
    SingleClass(usize),

    /// Nearest-neighbor classification was asked with no references.
    #[error("empty reference set")]
    EmptyReferences,

    /// A class has too few items for the requested fold count.
    #[error("too few items: {0}")]
    TooFewItems(String),

    /// The fold count is not admissible.
    #[error("invalid fold count {0}, need k >= 2")]
    InvalidK(usize),

    /// An I/O failure while reading or writing dataset files.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
