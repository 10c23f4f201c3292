//! Assembly of the full diagnostics report for one embedding set: the
//! label-agnostic spectrum numbers, per-class signal diagnostics when labels
//! are present, Davis–Kahan bounds, and the zeta-law summary, with every
//! threshold echoed for provenance.

use crate::diagnostics::{
    davis_kahan_bound, effective_rank, recoverable_dimension, riemann_zeta, signal_decomposition,
    spectral_slope, structural_dimensionality, truncated_zeta, Contrast, FloorSpec, NoiseFloor,
    SlopeFit,
};
use crate::error::Result;
use crate::matrix::{center, covariance, eig_sym, DivisorConvention, EmbeddingSet, Spectrum};
use crate::separation::{mahalanobis_energy, ModeCount};
use serde::{Deserialize, Serialize};

/// Thresholds and estimator choices for a diagnostics run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Cumulative-variance fraction for the effective rank.
    pub variance_fraction: f64,
    /// Signal-to-variance threshold for the structural dimensionality.
    pub tau: f64,
    pub floor: FloorSpec,
    /// Subspace sizes for the Davis–Kahan block; out-of-range entries are
    /// dropped.
    pub k_list: Vec<usize>,
    pub divisor: DivisorConvention,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            variance_fraction: 0.95,
            tau: 0.1,
            floor: FloorSpec::Theory { c0: 1.0 },
            k_list: vec![1, 2, 4, 8],
            divisor: DivisorConvention::Population,
        }
    }
}

/// Mahalanobis energies reported both squared and as distances, labeled, so
/// no reader has to guess the units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MahalanobisBlock {
    pub d_m_squared_full: f64,
    pub d_m_full: f64,
    pub d_m_squared_truncated: f64,
    pub d_m_truncated: f64,
    /// Leading-mode count of the truncated sum.
    pub k_used: usize,
}

/// Per-class (one-vs-rest) diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassDiagnostics {
    pub class_id: usize,
    /// Structural dimensionality k(N).
    pub k_structural: usize,
    pub mahalanobis: MahalanobisBlock,
}

/// One Davis–Kahan row: bound for the leading-k subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DkRow {
    pub k: usize,
    pub eigengap: f64,
    pub bound: f64,
    /// Where the eigengap came from: "empirical" here; a data-rich reference
    /// spectrum when one is supplied to the stability command.
    pub gap_source: String,
}

/// Truncated and full zeta sums for the fitted decay exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaLaw {
    pub beta: f64,
    /// Σ_{i≤K} i^{−β} at K = recoverable dimension (0 → sum 0).
    pub truncated_sum: f64,
    /// ζ(β) when β is in the convergent regime.
    pub zeta_value: Option<f64>,
    /// True when β ≤ 1 (harmonic regime): the full sum diverges.
    pub divergent: bool,
}

/// Echo of the thresholds a report was produced with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub variance_fraction: f64,
    pub tau: f64,
}

/// Full spectral diagnostics of one embedding set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub d: usize,
    pub divisor: DivisorConvention,
    pub effective_rank: usize,
    pub noise_floor: NoiseFloor,
    /// Recoverable dimension K(N): modes above the noise floor.
    pub recoverable_dim: usize,
    pub spectral_fit: SlopeFit,
    pub zeta_law: ZetaLaw,
    /// Present only for labeled inputs.
    pub per_class: Option<Vec<ClassDiagnostics>>,
    /// Unweighted mean of the per-class structural dimensionalities; no
    /// other aggregation across classes is attempted.
    pub k_structural_mean: Option<f64>,
    pub davis_kahan: Vec<DkRow>,
    pub thresholds: Thresholds,
    /// Raw (unclamped) eigenvalues for audit.
    pub eigenvalues_raw: Vec<f64>,
    /// Clamped eigenvalues, the ones every ratio above used.
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
}

/// Center, take the covariance, decompose, and assemble the report.
///
/// Label-aware blocks (k(N), Mahalanobis) appear only when the embedding set
/// carries labels. The spectrum here is that of the globally centered data;
/// class structure enters through the mean contrasts, not the centering.
pub fn diagnose(e: &EmbeddingSet, config: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    let centered = center(e);
    let cov = covariance(&centered, config.divisor)?;
    let spectrum = eig_sym(&cov)?;
    diagnose_with_spectrum(e, &centered, &spectrum, config)
}

/// Report assembly when the spectrum is already available.
pub fn diagnose_with_spectrum(
    e: &EmbeddingSet,
    centered: &EmbeddingSet,
    spectrum: &Spectrum,
    config: &DiagnosticsConfig,
) -> Result<DiagnosticsReport> {
    let effective_rank = effective_rank(spectrum, config.variance_fraction)?;
    let floor = config.floor.compute(spectrum, centered)?;
    let recoverable = recoverable_dimension(spectrum, &floor);
    let fit_hi = recoverable.max(5).min(spectrum.d());
    let fit = spectral_slope(spectrum, 1, fit_hi)?;

    let zeta_law = {
        let divergent = fit.beta <= 1.0;
        ZetaLaw {
            beta: fit.beta,
            truncated_sum: truncated_zeta(fit.beta, recoverable),
            zeta_value: if divergent {
                None
            } else {
                riemann_zeta(fit.beta).ok()
            },
            divergent,
        }
    };

    let per_class = if e.labels().is_some() {
        let mut blocks = Vec::with_capacity(e.class_count());
        for class in 0..e.class_count() {
            let sd = signal_decomposition(spectrum, e, Contrast::OneVsRest(class))?;
            let k_structural = structural_dimensionality(&sd, config.tau);
            let me = mahalanobis_energy(&sd, ModeCount::First(recoverable))?;
            blocks.push(ClassDiagnostics {
                class_id: class,
                k_structural,
                mahalanobis: MahalanobisBlock {
                    d_m_squared_full: me.full_energy,
                    d_m_full: me.full_energy.sqrt(),
                    d_m_squared_truncated: me.truncated_energy,
                    d_m_truncated: me.truncated_energy.sqrt(),
                    k_used: me.k_used,
                },
            });
        }
        Some(blocks)
    } else {
        None
    };

    let k_structural_mean = per_class.as_ref().map(|blocks| {
        blocks.iter().map(|b| b.k_structural as f64).sum::<f64>() / blocks.len() as f64
    });

    let davis_kahan = config
        .k_list
        .iter()
        .filter(|&&k| k >= 1 && k < spectrum.d())
        .map(|&k| -> Result<DkRow> {
            Ok(DkRow {
                k,
                eigengap: spectrum.eigengap(k)?,
                bound: davis_kahan_bound(floor.value, spectrum, k)?,
                gap_source: "empirical".to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DiagnosticsReport {
        n: e.n(),
        d: e.d(),
        divisor: config.divisor,
        effective_rank,
        noise_floor: floor,
        recoverable_dim: recoverable,
        spectral_fit: fit,
        zeta_law,
        per_class,
        k_structural_mean,
        davis_kahan,
        thresholds: Thresholds {
            variance_fraction: config.variance_fraction,
            tau: config.tau,
        },
        eigenvalues_raw: spectrum.eigenvalues_raw().to_vec(),
        eigenvalues: spectrum.eigenvalues().to_vec(),
        trace: spectrum.eigenvalues_raw().iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::rng::SplitMix64;

    fn gaussian_blob(n: usize, d: usize, seed: u64, labeled: bool) -> EmbeddingSet {
        let mut rng = SplitMix64::new(seed);
        let mut data = Matrix::zeros(n, d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            for j in 0..d {
                let scale = 1.0 / (j + 1) as f64;
                let shift = if class == 1 && j == 0 { 1.0 } else { 0.0 };
                data.set(i, j, rng.next_gaussian() * scale + shift);
            }
            labels.push(class);
        }
        EmbeddingSet::new(data, if labeled { Some(labels) } else { None }).unwrap()
    }

    #[test]
    fn report_unlabeled_omits_class_blocks() {
        let e = gaussian_blob(200, 6, 1, false);
        let report = diagnose(&e, &DiagnosticsConfig::default()).unwrap();
        assert!(report.per_class.is_none());
        assert!(report.effective_rank >= 1);
        assert_eq!(report.thresholds.tau, 0.1);
        assert_eq!(report.eigenvalues.len(), 6);
    }

    #[test]
    fn report_labeled_has_one_block_per_class() {
        let e = gaussian_blob(200, 6, 2, true);
        let report = diagnose(&e, &DiagnosticsConfig::default()).unwrap();
        let blocks = report.per_class.unwrap();
        assert_eq!(blocks.len(), 2);
        for b in &blocks {
            assert!(b.mahalanobis.d_m_squared_truncated <= b.mahalanobis.d_m_squared_full);
            assert!(
                (b.mahalanobis.d_m_full - b.mahalanobis.d_m_squared_full.sqrt()).abs() <= 1e-12
            );
        }
    }

    #[test]
    fn report_thresholds_echoed() {
        let e = gaussian_blob(100, 4, 3, true);
        let config = DiagnosticsConfig {
            variance_fraction: 0.9,
            tau: 0.25,
            ..DiagnosticsConfig::default()
        };
        let report = diagnose(&e, &config).unwrap();
        assert_eq!(report.thresholds.variance_fraction, 0.9);
        assert_eq!(report.thresholds.tau, 0.25);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"tau\": 0.25") || json.contains("\"tau\":0.25"));
    }

    #[test]
    fn report_dk_rows_skip_out_of_range_k() {
        let e = gaussian_blob(100, 4, 4, false);
        let config = DiagnosticsConfig {
            k_list: vec![1, 2, 3, 4, 9],
            ..DiagnosticsConfig::default()
        };
        let report = diagnose(&e, &config).unwrap();
        let ks: Vec<usize> = report.davis_kahan.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![1, 2, 3]);
        for row in &report.davis_kahan {
            assert!((0.0..=1.0).contains(&row.bound));
            assert_eq!(row.gap_source, "empirical");
        }
    }

    #[test]
    fn report_deterministic() {
        let e = gaussian_blob(150, 5, 7, true);
        let a = diagnose(&e, &DiagnosticsConfig::default()).unwrap();
        let b = diagnose(&e, &DiagnosticsConfig::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
