//! CLI error with a stable exit code.
//!
//! Exit-code taxonomy (also in `--help` and the README):
//!   2  I/O: unreadable, missing, or malformed files
//!   3  data quality: NaN/Inf entries, too few samples
//!   4  contract: dimension or label mismatches, out-of-range arguments
//!   5  calibration refused: no recoverable head to anchor the tail
//!   6  config: schema violations, unknown keys, bad flag values

use spectral_lab::SpectralError;
use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 6,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        let code = match &e {
            SpectralError::DataQuality(_) => 3,
            SpectralError::Contract(_) | SpectralError::Numerical(_) | SpectralError::Divergent(_) => 4,
            SpectralError::CalibrationRefused(_) => 5,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}
