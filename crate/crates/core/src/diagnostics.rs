//! Spectral diagnostics of a covariance spectrum.
//!
//! Label-agnostic: effective rank, noise floor, recoverable dimension K(N),
//! power-law slope β, truncated and full zeta sums. Label-aware: per-class
//! signal decomposition (λ_i, α_i²) and structural dimensionality k(N).
//! Plus the Davis–Kahan eigenvector-stability bound.
//!
//! Conventions shared by every ratio in this module: eigenvalues are the
//! clamped (non-negative) values of the spectrum, and zero-eigenvalue modes
//! are skipped rather than producing infinities.

use crate::error::{Result, SpectralError};
use crate::matrix::{
    center, covariance, dot, op_norm_sym_diff, DivisorConvention, EmbeddingSet, Matrix, Spectrum,
};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Eigenvalues below λ₁·RATIO_EPS are treated as numerically zero when
/// fitting slopes.
const SLOPE_VALID_EPS: f64 = 1e-12;

/// Fixed seed for the split-half shuffle ("split_hf" in ASCII), so the
/// empirical floor is deterministic for identical input bytes.
const SPLIT_HALF_SHUFFLE_SEED: u64 = 0x73706c69745f6866;

/// Per-mode (λ_i, α_i²) pairs for one class contrast.
#[derive(Debug, Clone)]
pub struct SignalDecomposition {
    /// Eigenvalues, non-increasing (clamped at zero).
    pub lambdas: Vec<f64>,
    /// Squared projections α_i² = (v_iᵀd)² of the class-mean difference.
    pub alphas_sq: Vec<f64>,
    /// Class id of the contrast.
    pub class_id: usize,
    /// Count of modes with λ_i > 0.
    pub modes: usize,
}

/// Which contrast defines the class-mean difference d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contrast {
    /// d = μ_class − μ_rest.
    OneVsRest(usize),
    /// d = μ_a − μ_b.
    Pairwise(usize, usize),
}

/// How the operator-norm noise floor was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorMethod {
    /// c₀·λ₁·√(D/N).
    Theory,
    /// Half the operator-norm distance between the covariances of two
    /// shuffled halves of the data.
    SplitHalf,
}

/// Operator-norm scale of Σ̂ − Σ, with provenance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseFloor {
    pub value: f64,
    pub method: FloorMethod,
    /// Constant used by the theory formula; None for the empirical floor.
    pub c0: Option<f64>,
}

/// Noise-floor estimator selection, carried through configs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum FloorSpec {
    Theory { c0: f64 },
    SplitHalf,
}

impl FloorSpec {
    /// Evaluate the floor for a spectrum and the data behind it.
    pub fn compute(&self, spectrum: &Spectrum, data: &EmbeddingSet) -> Result<NoiseFloor> {
        match *self {
            FloorSpec::Theory { c0 } => noise_floor_theory(spectrum, c0),
            FloorSpec::SplitHalf => noise_floor_split_half(data),
        }
    }
}

/// Least-squares line fit in log-log space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Decay exponent: the negated slope of log λ on log i.
    pub beta: f64,
    /// Coefficient of determination; None when the response is constant.
    pub r_squared: Option<f64>,
    /// 1-based mode interval actually used.
    pub fit_lo: usize,
    pub fit_hi: usize,
}

/// Smallest m such that the leading m eigenvalues explain at least
/// `variance_fraction` of the total variance.
pub fn effective_rank(s: &Spectrum, variance_fraction: f64) -> Result<usize> {
    if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
        return Err(SpectralError::Contract(format!(
            "variance fraction {variance_fraction} outside (0, 1]"
        )));
    }
    let total: f64 = s.eigenvalues().iter().sum();
    if total <= 0.0 {
        return Err(SpectralError::DataQuality(
            "effective rank undefined for an all-zero spectrum".into(),
        ));
    }
    let mut cum = 0.0;
    for (i, l) in s.eigenvalues().iter().enumerate() {
        cum += l;
        if cum / total >= variance_fraction {
            return Ok(i + 1);
        }
    }
    Ok(s.d())
}

/// Project the class-mean difference of `contrast` onto the eigenbasis.
///
/// α_i² = (v_iᵀd)² where d is the contrast mean difference computed from the
/// (possibly uncentered) embedding rows; mean differences are unaffected by
/// global centering.
pub fn signal_decomposition(
    s: &Spectrum,
    e: &EmbeddingSet,
    contrast: Contrast,
) -> Result<SignalDecomposition> {
    if e.d() != s.d() {
        return Err(SpectralError::Contract(format!(
            "embedding dimension {} does not match spectrum dimension {}",
            e.d(),
            s.d()
        )));
    }
    let (class_id, mu_a, mu_b) = match contrast {
        Contrast::OneVsRest(c) => {
            if c >= e.class_count() {
                return Err(SpectralError::Contract(format!(
                    "class id {c} out of range [0, {})",
                    e.class_count()
                )));
            }
            (c, e.class_mean(c, false)?, e.class_mean(c, true)?)
        }
        Contrast::Pairwise(a, b) => (a, e.class_mean(a, false)?, e.class_mean(b, false)?),
    };
    let d: Vec<f64> = mu_a.iter().zip(&mu_b).map(|(a, b)| a - b).collect();
    let mut alphas_sq = Vec::with_capacity(s.d());
    for i in 0..s.d() {
        let alpha = dot(&s.eigenvector(i), &d);
        alphas_sq.push(alpha * alpha);
    }
    let modes = s.eigenvalues().iter().filter(|&&l| l > 0.0).count();
    Ok(SignalDecomposition {
        lambdas: s.eigenvalues().to_vec(),
        alphas_sq,
        class_id,
        modes,
    })
}

/// Count of modes whose signal-to-variance ratio α_i²/λ_i clears τ.
/// Zero-eigenvalue modes are skipped, never counted.
pub fn structural_dimensionality(sd: &SignalDecomposition, tau: f64) -> usize {
    sd.lambdas
        .iter()
        .zip(&sd.alphas_sq)
        .filter(|(&l, &a)| l > 0.0 && a / l >= tau)
        .count()
}

/// Theoretical noise floor c₀·λ₁·√(D/N).
pub fn noise_floor_theory(s: &Spectrum, c0: f64) -> Result<NoiseFloor> {
    if s.source_n() == 0 {
        return Err(SpectralError::Contract(
            "theory noise floor needs the sample count recorded in the spectrum".into(),
        ));
    }
    let d_over_n = s.d() as f64 / s.source_n() as f64;
    Ok(NoiseFloor {
        value: c0 * s.leading_eigenvalue() * d_over_n.sqrt(),
        method: FloorMethod::Theory,
        c0: Some(c0),
    })
}

/// Empirical noise floor: shuffle the rows with a fixed seed, split into two
/// halves, and take half the operator-norm distance between the two
/// half-sample covariances.
pub fn noise_floor_split_half(e: &EmbeddingSet) -> Result<NoiseFloor> {
    if e.n() < 4 {
        return Err(SpectralError::DataQuality(format!(
            "split-half floor needs at least 4 samples, got {}",
            e.n()
        )));
    }
    let mut order: Vec<usize> = (0..e.n()).collect();
    let mut rng = SplitMix64::new(SPLIT_HALF_SHUFFLE_SEED);
    rng.shuffle(&mut order);
    let mid = e.n() / 2;
    let half_cov = |idx: &[usize]| -> Result<_> {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| e.data().row(i).to_vec()).collect();
        let half = EmbeddingSet::new(Matrix::from_rows(&rows)?, None)?;
        covariance(&center(&half), DivisorConvention::Population)
    };
    let a = half_cov(&order[..mid])?;
    let b = half_cov(&order[mid..])?;
    Ok(NoiseFloor {
        value: op_norm_sym_diff(&a, &b)? / 2.0,
        method: FloorMethod::SplitHalf,
        c0: None,
    })
}

/// Largest k such that λ_k ≥ the floor, counting only strictly positive
/// eigenvalues. 0 when no mode clears the floor.
pub fn recoverable_dimension(s: &Spectrum, nf: &NoiseFloor) -> usize {
    s.eigenvalues()
        .iter()
        .take_while(|&&l| l > 0.0 && l >= nf.value)
        .count()
}

/// Ordinary least squares of y on x. Returns (slope, intercept, R²) with
/// R² = None when the response is constant (undefined).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, Option<f64>)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(SpectralError::Contract(format!(
            "least squares needs two or more paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(SpectralError::Contract(
            "least squares needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > 0.0 {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let r = yi - (slope * xi + intercept);
                r * r
            })
            .sum();
        Some(1.0 - ss_res / syy)
    } else {
        None
    };
    Ok((slope, intercept, r_squared))
}

/// Fit λ_i ~ i^{−β} by least squares of log λ_i on log i over the 1-based
/// inclusive mode interval. Modes with λ_i ≤ λ₁·1e-12 are excluded; at least
/// 3 valid modes are required.
pub fn spectral_slope(s: &Spectrum, fit_lo: usize, fit_hi: usize) -> Result<SlopeFit> {
    if fit_lo < 1 || fit_hi < fit_lo || fit_hi > s.d() {
        return Err(SpectralError::Contract(format!(
            "fit range [{fit_lo}, {fit_hi}] invalid for spectrum of {} modes",
            s.d()
        )));
    }
    let lam1 = s.leading_eigenvalue();
    let cutoff = lam1 * SLOPE_VALID_EPS;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in fit_lo..=fit_hi {
        let l = s.eigenvalues()[i - 1];
        if l > cutoff {
            xs.push((i as f64).ln());
            ys.push(l.ln());
        }
    }
    if xs.len() < 3 {
        return Err(SpectralError::Contract(format!(
            "slope fit needs at least 3 modes above the numerical-zero cutoff, found {}",
            xs.len()
        )));
    }
    let (slope, _intercept, r_squared) = ols(&xs, &ys)?;
    Ok(SlopeFit {
        beta: -slope,
        r_squared,
        fit_lo,
        fit_hi,
    })
}

/// Exact partial sum Σ_{i=1}^{K} i^{−β} by direct summation.
pub fn truncated_zeta(beta: f64, k: usize) -> f64 {
    // Sum smallest terms first (for β > 0) to limit rounding.
    let mut s = 0.0;
    for i in (1..=k).rev() {
        s += (i as f64).powf(-beta);
    }
    s
}

/// Riemann zeta ζ(β) for β > 1, via partial summation to M = 10⁵ plus the
/// Euler–Maclaurin tail corrections M^{1−β}/(β−1) + M^{−β}/2. Absolute error
/// is below 1e-9 for β ≥ 1.1 (the next correction term is O(β·M^{−β−1})).
pub fn riemann_zeta(beta: f64) -> Result<f64> {
    if beta <= 1.0 + 1e-6 {
        return Err(SpectralError::Divergent(format!(
            "zeta sum diverges (harmonic regime) for exponent {beta}"
        )));
    }
    const M: usize = 100_000;
    let m = M as f64;
    let partial = truncated_zeta(beta, M);
    Ok(partial + m.powf(1.0 - beta) / (beta - 1.0) + 0.5 * m.powf(-beta))
}

/// Davis–Kahan subspace bound min(1, 2·op_err/δ_k) with δ_k = λ_k − λ_{k+1}
/// taken from `s`. Returns the vacuous bound 1 when δ_k ≤ 1e-14.
pub fn davis_kahan_bound(op_err: f64, s: &Spectrum, k: usize) -> Result<f64> {
    if op_err < 0.0 {
        return Err(SpectralError::Contract(format!(
            "operator-norm error must be non-negative, got {op_err}"
        )));
    }
    let gap = s.eigengap(k)?;
    if gap <= 1e-14 {
        return Ok(1.0);
    }
    Ok((2.0 * op_err / gap).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{CovarianceMatrix, Matrix};
    use std::f64::consts::PI;

    fn diag_spectrum(evals: &[f64], n: usize) -> Spectrum {
        let d = evals.len();
        Spectrum::new(
            evals.to_vec(),
            evals.to_vec(),
            Matrix::identity(d),
            n,
        )
    }

    #[test]
    fn effective_rank_examples() {
        let s = diag_spectrum(&[0.96, 0.04], 10);
        assert_eq!(effective_rank(&s, 0.95).unwrap(), 1);

        let s = diag_spectrum(&vec![1.0; 20], 10);
        assert_eq!(effective_rank(&s, 0.95).unwrap(), 19);

        let s = diag_spectrum(&[0.5, 0.3, 0.15, 0.05], 10);
        assert_eq!(effective_rank(&s, 0.95).unwrap(), 3);
    }

    #[test]
    fn effective_rank_rejects_zero_spectrum() {
        let s = diag_spectrum(&[0.0, 0.0], 10);
        assert!(matches!(
            effective_rank(&s, 0.95),
            Err(SpectralError::DataQuality(_))
        ));
    }

    #[test]
    fn effective_rank_monotone_in_fraction() {
        let s = diag_spectrum(&[0.4, 0.3, 0.2, 0.1], 10);
        let mut last = 0;
        for f in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let r = effective_rank(&s, f).unwrap();
            assert!(r >= last);
            last = r;
        }
    }

    fn labeled(rows: &[Vec<f64>], labels: Vec<usize>) -> EmbeddingSet {
        EmbeddingSet::new(Matrix::from_rows(rows).unwrap(), Some(labels)).unwrap()
    }

    #[test]
    fn signal_decomposition_identity_basis() {
        // Class means differ by d = (1, 2) with an identity eigenbasis.
        let e = labeled(
            &[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0, 0, 1, 1],
        );
        let s = diag_spectrum(&[2.0, 1.0], 4);
        let sd = signal_decomposition(&s, &e, Contrast::OneVsRest(0)).unwrap();
        assert!((sd.alphas_sq[0] - 1.0).abs() <= 1e-12);
        assert!((sd.alphas_sq[1] - 4.0).abs() <= 1e-12);
        // Parseval over the orthonormal basis.
        let norm_sq = 1.0 + 4.0;
        let total: f64 = sd.alphas_sq.iter().sum();
        assert!((total - norm_sq).abs() <= 1e-9 * norm_sq);
    }

    #[test]
    fn signal_decomposition_aligned_and_zero() {
        let e = labeled(
            &[vec![2.0, 0.0], vec![2.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0, 0, 1, 1],
        );
        let s = diag_spectrum(&[1.0, 1.0], 4);
        let sd = signal_decomposition(&s, &e, Contrast::OneVsRest(0)).unwrap();
        assert_eq!(sd.alphas_sq, vec![4.0, 0.0]);

        // Identical class means → all zeros.
        let e = labeled(
            &[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![0, 0, 1, 1],
        );
        let sd = signal_decomposition(&s, &e, Contrast::OneVsRest(1)).unwrap();
        assert!(sd.alphas_sq.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn structural_dimensionality_examples() {
        let sd = SignalDecomposition {
            lambdas: vec![1.0, 1.0, 1.0],
            alphas_sq: vec![1.0, 0.05, 0.001],
            class_id: 0,
            modes: 3,
        };
        assert_eq!(structural_dimensionality(&sd, 0.1), 1);

        let sd = SignalDecomposition {
            lambdas: vec![1.0, 1.0],
            alphas_sq: vec![0.0, 0.0],
            class_id: 0,
            modes: 2,
        };
        assert_eq!(structural_dimensionality(&sd, 0.1), 0);

        let sd = SignalDecomposition {
            lambdas: vec![2.0, 0.1],
            alphas_sq: vec![0.4, 0.02],
            class_id: 0,
            modes: 2,
        };
        assert_eq!(structural_dimensionality(&sd, 0.1), 2);
    }

    #[test]
    fn structural_dimensionality_skips_zero_modes() {
        let sd = SignalDecomposition {
            lambdas: vec![1.0, 0.0],
            alphas_sq: vec![0.5, 0.5],
            class_id: 0,
            modes: 1,
        };
        assert_eq!(structural_dimensionality(&sd, 0.1), 1);
        // Non-increasing in τ.
        assert!(structural_dimensionality(&sd, 0.6) <= structural_dimensionality(&sd, 0.1));
    }

    #[test]
    fn noise_floor_theory_examples() {
        let s = diag_spectrum(&vec![1.0; 100], 100);
        let nf = noise_floor_theory(&s, 1.0).unwrap();
        assert!((nf.value - 1.0).abs() <= 1e-12);

        let mut evals = vec![2.0];
        evals.extend(vec![0.5; 63]);
        let s = diag_spectrum(&evals, 256);
        let nf = noise_floor_theory(&s, 1.0).unwrap();
        assert!((nf.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn split_half_floor_zero_for_constant_rows() {
        // Duplicated data in the degenerate limit: all rows identical, so
        // any half has the zero covariance and the floor is exactly 0.
        let rows = vec![vec![3.0, -1.0, 2.0]; 8];
        let e = EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let nf = noise_floor_split_half(&e).unwrap();
        assert_eq!(nf.value, 0.0);
        assert_eq!(nf.method, FloorMethod::SplitHalf);
    }

    #[test]
    fn split_half_floor_needs_four_samples() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let e = EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        assert!(noise_floor_split_half(&e).is_err());
    }

    #[test]
    fn recoverable_dimension_examples() {
        let s = diag_spectrum(&[1.0, 0.5, 0.1, 0.01], 10);
        let nf = NoiseFloor {
            value: 0.05,
            method: FloorMethod::Theory,
            c0: Some(1.0),
        };
        assert_eq!(recoverable_dimension(&s, &nf), 3);

        // Floor 0 counts the strictly positive eigenvalues.
        let s = diag_spectrum(&[1.0, 0.5, 0.0, 0.0], 10);
        let nf = NoiseFloor {
            value: 0.0,
            method: FloorMethod::Theory,
            c0: Some(1.0),
        };
        assert_eq!(recoverable_dimension(&s, &nf), 2);

        // λ_i = i^{−2}, floor 0.01 → 10.
        let evals: Vec<f64> = (1..=20).map(|i| (i as f64).powi(-2)).collect();
        let s = diag_spectrum(&evals, 10);
        let nf = NoiseFloor {
            value: 0.01,
            method: FloorMethod::Theory,
            c0: Some(1.0),
        };
        assert_eq!(recoverable_dimension(&s, &nf), 10);
    }

    #[test]
    fn recoverable_dimension_non_increasing_in_floor() {
        let evals: Vec<f64> = (1..=12).map(|i| (i as f64).powf(-1.5)).collect();
        let s = diag_spectrum(&evals, 10);
        let mut last = usize::MAX;
        for v in [0.0, 0.01, 0.1, 0.5, 2.0] {
            let nf = NoiseFloor {
                value: v,
                method: FloorMethod::Theory,
                c0: Some(1.0),
            };
            let k = recoverable_dimension(&s, &nf);
            assert!(k <= last);
            last = k;
        }
    }

    #[test]
    fn spectral_slope_exact_power_law() {
        let evals: Vec<f64> = (1..=10).map(|i| (i as f64).powi(-2)).collect();
        let s = diag_spectrum(&evals, 10);
        let fit = spectral_slope(&s, 1, 10).unwrap();
        assert!((fit.beta - 2.0).abs() <= 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectral_slope_constant_spectrum() {
        let s = diag_spectrum(&[3.0, 3.0, 3.0, 3.0], 10);
        let fit = spectral_slope(&s, 1, 4).unwrap();
        assert_eq!(fit.beta, 0.0);
        assert!(fit.r_squared.is_none());
    }

    #[test]
    fn spectral_slope_three_point_example() {
        let s = diag_spectrum(&[1.0, 0.25, 0.111111], 10);
        let fit = spectral_slope(&s, 1, 3).unwrap();
        assert!((fit.beta - 2.0).abs() <= 1e-6, "beta {}", fit.beta);
    }

    #[test]
    fn spectral_slope_needs_three_valid_modes() {
        let s = diag_spectrum(&[1.0, 0.5, 1e-15, 1e-16], 10);
        assert!(spectral_slope(&s, 1, 4).is_err());
    }

    #[test]
    fn truncated_zeta_examples() {
        assert_eq!(truncated_zeta(2.0, 1), 1.0);
        assert!((truncated_zeta(2.0, 3) - 49.0 / 36.0).abs() <= 1e-15);
        assert!((truncated_zeta(0.0, 5) - 5.0).abs() <= 1e-15);
    }

    #[test]
    fn riemann_zeta_analytic_identities() {
        let z2 = riemann_zeta(2.0).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() <= 1e-9);
        let z4 = riemann_zeta(4.0).unwrap();
        assert!((z4 - PI.powi(4) / 90.0).abs() <= 1e-9);
    }

    #[test]
    fn riemann_zeta_rejects_harmonic_regime() {
        assert!(matches!(
            riemann_zeta(1.0),
            Err(SpectralError::Divergent(_))
        ));
        assert!(riemann_zeta(0.5).is_err());
    }

    #[test]
    fn zeta_dominates_partial_sums() {
        for beta in [1.2, 2.0, 3.5] {
            let z = riemann_zeta(beta).unwrap();
            for k in [1usize, 10, 100, 10_000] {
                assert!(z >= truncated_zeta(beta, k));
            }
        }
    }

    #[test]
    fn davis_kahan_examples() {
        let s = diag_spectrum(&[1.0, 0.5, 0.25], 10);
        assert_eq!(davis_kahan_bound(0.0, &s, 1).unwrap(), 0.0);
        assert!((davis_kahan_bound(0.1, &s, 1).unwrap() - 0.4).abs() <= 1e-12);

        // Degenerate gap → vacuous bound.
        let s = diag_spectrum(&[1.0, 1.0, 0.5], 10);
        assert_eq!(davis_kahan_bound(0.3, &s, 1).unwrap(), 1.0);
    }

    #[test]
    fn davis_kahan_rejects_out_of_range_k() {
        let s = diag_spectrum(&[1.0, 0.5], 10);
        assert!(davis_kahan_bound(0.1, &s, 0).is_err());
        assert!(davis_kahan_bound(0.1, &s, 2).is_err());
    }

    #[test]
    fn split_half_matches_direct_construction() {
        // Spot check: the floor equals op_norm_sym_diff of the two shuffled
        // half covariances divided by two, computed independently here.
        let mut rows = Vec::new();
        let mut state = 99u64;
        for _ in 0..16 {
            let mut r = Vec::new();
            for _ in 0..3 {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                r.push(((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5);
            }
            rows.push(r);
        }
        let e = EmbeddingSet::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let nf = noise_floor_split_half(&e).unwrap();

        let mut order: Vec<usize> = (0..16).collect();
        let mut rng = SplitMix64::new(SPLIT_HALF_SHUFFLE_SEED);
        rng.shuffle(&mut order);
        let take = |idx: &[usize]| {
            let sel: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
            let half = EmbeddingSet::new(Matrix::from_rows(&sel).unwrap(), None).unwrap();
            covariance(&center(&half), DivisorConvention::Population).unwrap()
        };
        let a = take(&order[..8]);
        let b = take(&order[8..]);
        let expect = op_norm_sym_diff(&a, &b).unwrap() / 2.0;
        assert_eq!(nf.value, expect);
        let _ = CovarianceMatrix::from_entries(
            a.entries().clone(),
            DivisorConvention::Population,
            8,
        )
        .unwrap();
    }
}
