use thiserror::Error;

/// Errors shared across the library.
///
/// Variants map onto distinct failure classes so callers (notably the CLI)
/// can translate them into stable exit codes.
#[derive(Debug, Clone, Error)]
pub enum SpectralError {
    /// Input data failed a quality gate: NaN/Inf entries, malformed labels,
    /// too few samples.
    #[error("data quality: {0}")]
    DataQuality(String),

    /// A caller violated an operation contract: dimension mismatch, index out
    /// of range, uncentered input where centered is required.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative routine exhausted its budget without converging.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested zeta exponent lies in the divergent (harmonic) regime.
    #[error("divergent: {0}")]
    Divergent(String),

    /// Spectral calibration was refused: no recoverable head to anchor the tail.
    #[error("calibration refused: {0}")]
    CalibrationRefused(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
