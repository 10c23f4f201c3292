//! Subcommand implementations and the argument/ValueEnum types they share.

pub mod classify;
pub mod diagnose;
pub mod simulate;
pub mod spectrum;
pub mod stability;
pub mod zeta_filter;

use crate::errors::CliError;
use clap::ValueEnum;
use spectral_lab::diagnostics::FloorSpec;
use spectral_lab::matrix::{
    center, covariance, eig_sym, DivisorConvention, EmbeddingSet, Matrix, Spectrum,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivisorArg {
    /// 1/N (the default).
    Population,
    /// 1/(N−1).
    Unbiased,
}

impl DivisorArg {
    pub fn to_convention(self) -> DivisorConvention {
        match self {
            DivisorArg::Population => DivisorConvention::Population,
            DivisorArg::Unbiased => DivisorConvention::Unbiased,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FloorArg {
    /// c₀·λ₁·√(D/N).
    Theory,
    /// Operator-norm distance between two shuffled half-sample covariances,
    /// halved.
    SplitHalf,
}

impl FloorArg {
    pub fn to_floor_spec(self, c0: f64) -> FloorSpec {
        match self {
            FloorArg::Theory => FloorSpec::Theory { c0 },
            FloorArg::SplitHalf => FloorSpec::SplitHalf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Bin,
}

/// Parse a comma-separated list of subspace sizes.
pub fn parse_k_list(raw: &str) -> Result<Vec<usize>, CliError> {
    let ks: Result<Vec<usize>, _> = raw.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match ks {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::config(format!(
            "--k expects a comma-separated list of positive integers, got `{raw}`"
        ))),
    }
}

/// Center, take the covariance, and decompose one loaded matrix.
pub fn pipeline_spectrum(
    matrix: Matrix,
    labels: Option<Vec<usize>>,
    divisor: DivisorConvention,
) -> Result<(EmbeddingSet, EmbeddingSet, Spectrum, f64), CliError> {
    let e = EmbeddingSet::new(matrix, labels)?;
    let centered = center(&e);
    let cov = covariance(&centered, divisor)?;
    let trace = cov.entries().trace();
    let spectrum = eig_sym(&cov)?;
    Ok((e, centered, spectrum, trace))
}

/// Eigenvector columns as nested vectors, for JSON output.
pub fn eigenvector_columns(s: &Spectrum) -> Vec<Vec<f64>> {
    (0..s.d()).map(|j| s.eigenvector(j)).collect()
}
