//! Post-hoc spectral calibration: keep the recoverable head of an empirical
//! spectrum untouched and replace the noise-dominated tail with a continuous
//! power-law decay λ̃_i = c·i^{−β}, with c chosen so the tail joins the head
//! exactly at the splice index.
//!
//! The filter never renormalizes total variance; the trace change is the
//! caller's to report. Unlike a Wiener-style shrinkage of coefficients, the
//! replacement acts on the covariance spectrum itself, ahead of Mahalanobis
//! energies or downstream classifiers.

use crate::diagnostics::{recoverable_dimension, spectral_slope, NoiseFloor, SignalDecomposition};
use crate::error::{Result, SpectralError};
use crate::matrix::{dot, Matrix, Spectrum};
use crate::separation::MahalanobisResult;

/// How the splice index K is chosen.
#[derive(Debug, Clone, Copy)]
pub enum SpliceIndex {
    /// Use this K directly; must satisfy 1 ≤ K < D.
    Fixed(usize),
    /// K = recoverable dimension under the given noise floor, clamped to
    /// D−1 when everything clears the floor.
    Auto(NoiseFloor),
}

/// How the tail exponent β is chosen.
#[derive(Debug, Clone, Copy)]
pub enum TailExponent {
    /// Use this β directly; must be ≥ 0.
    Fixed(f64),
    /// Fit the decay over the recoverable head (modes 1..max(K, 3), capped
    /// at D) and floor the result at 0.
    Auto,
}

/// A spectrum whose head is the raw empirical head and whose tail follows
/// c·i^{−β}.
#[derive(Debug, Clone)]
pub struct CalibratedSpectrum {
    /// λ̃_i: bit-identical to the input for i ≤ K, c·i^{−β} beyond.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors, unchanged from the input spectrum.
    pub eigenvectors: Matrix,
    /// Splice index (1-based): the last mode kept from the raw spectrum.
    pub k: usize,
    /// Tail decay exponent actually used.
    pub beta: f64,
    /// Continuity constant c = λ̂_K·K^β.
    pub c: f64,
    /// True when a negative fitted exponent was floored to 0 (flat tail).
    pub beta_floored: bool,
}

impl CalibratedSpectrum {
    pub fn d(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Build a calibrated spectrum from an empirical one.
///
/// Refuses calibration (so the caller can fall back to the raw spectrum)
/// when the recoverable head is empty or the anchor eigenvalue λ̂_K is not
/// strictly positive.
pub fn calibrate(s: &Spectrum, k: SpliceIndex, beta: TailExponent) -> Result<CalibratedSpectrum> {
    let d = s.d();
    if d < 2 {
        return Err(SpectralError::Contract(
            "calibration needs at least 2 modes".into(),
        ));
    }
    let k = match k {
        SpliceIndex::Fixed(k) => {
            if k < 1 || k >= d {
                return Err(SpectralError::Contract(format!(
                    "splice index K={k} outside [1, {d})"
                )));
            }
            k
        }
        SpliceIndex::Auto(nf) => {
            let k = recoverable_dimension(s, &nf);
            if k == 0 {
                return Err(SpectralError::CalibrationRefused(format!(
                    "no mode clears the noise floor {:.6e}",
                    nf.value
                )));
            }
            k.min(d - 1)
        }
    };
    let anchor = s.eigenvalues()[k - 1];
    if anchor <= 0.0 {
        return Err(SpectralError::CalibrationRefused(format!(
            "anchor eigenvalue at splice index {k} is not positive"
        )));
    }

    let (beta, beta_floored) = match beta {
        TailExponent::Fixed(b) => {
            if b < 0.0 || b.is_nan() {
                return Err(SpectralError::Contract(format!(
                    "tail exponent must be non-negative, got {b}"
                )));
            }
            (b, false)
        }
        TailExponent::Auto => {
            let hi = k.max(3).min(d);
            let fit = spectral_slope(s, 1, hi)?;
            // A non-positive fitted exponent would give a non-decaying tail;
            // fall back to a flat tail at the anchor and flag it.
            if fit.beta <= 0.0 {
                (0.0, true)
            } else {
                (fit.beta, false)
            }
        }
    };

    let c = anchor * (k as f64).powf(beta);
    let mut eigenvalues = Vec::with_capacity(d);
    eigenvalues.extend_from_slice(&s.eigenvalues()[..k]);
    for i in (k + 1)..=d {
        eigenvalues.push(c * (i as f64).powf(-beta));
    }
    Ok(CalibratedSpectrum {
        eigenvalues,
        eigenvectors: s.eigenvectors().clone(),
        k,
        beta,
        c,
        beta_floored,
    })
}

/// Mahalanobis energy against the calibrated spectrum: d_M² = Σ α_i²/λ̃_i
/// over all D modes. The tail is strictly positive so no cutoff is applied
/// there; the result's truncated part is the head sum (identical to the raw
/// head energy, since the head is untouched).
pub fn calibrated_mahalanobis(
    sd: &SignalDecomposition,
    cs: &CalibratedSpectrum,
) -> Result<MahalanobisResult> {
    if sd.lambdas.len() != cs.d() {
        return Err(SpectralError::Contract(format!(
            "mode count mismatch: decomposition has {}, calibrated spectrum has {}",
            sd.lambdas.len(),
            cs.d()
        )));
    }
    let mut per_mode = Vec::with_capacity(cs.d());
    let mut full = 0.0;
    let mut head = 0.0;
    for (i, (&l, &a)) in cs.eigenvalues.iter().zip(&sd.alphas_sq).enumerate() {
        if l <= 0.0 {
            return Err(SpectralError::Contract(format!(
                "calibrated eigenvalue at mode {} is not positive",
                i + 1
            )));
        }
        let term = a / l;
        per_mode.push(term);
        full += term;
        if i < cs.k {
            head += term;
        }
    }
    Ok(MahalanobisResult {
        full_energy: full,
        truncated_energy: head,
        per_mode,
        k_used: cs.k,
    })
}

/// Fisher direction against the calibrated spectrum:
/// w̃ = Σ_i (α_i/λ̃_i)·v_i over all D modes.
pub fn calibrated_fisher(cs: &CalibratedSpectrum, d: &[f64]) -> Result<Vec<f64>> {
    if d.len() != cs.eigenvectors.rows() {
        return Err(SpectralError::Contract(format!(
            "mean-difference length {} does not match dimension {}",
            d.len(),
            cs.eigenvectors.rows()
        )));
    }
    let mut w = vec![0.0; d.len()];
    for i in 0..cs.d() {
        let l = cs.eigenvalues[i];
        if l <= 0.0 {
            return Err(SpectralError::Contract(format!(
                "calibrated eigenvalue at mode {} is not positive",
                i + 1
            )));
        }
        let v = cs.eigenvectors.column(i);
        let coef = dot(&v, d) / l;
        for (wj, vj) in w.iter_mut().zip(&v) {
            *wj += coef * vj;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::FloorMethod;
    use crate::separation::{fisher_direction, mahalanobis_energy, ModeCount};

    fn diag_spectrum(evals: &[f64]) -> Spectrum {
        Spectrum::new(
            evals.to_vec(),
            evals.to_vec(),
            Matrix::identity(evals.len()),
            0,
        )
    }

    #[test]
    fn calibrate_worked_example() {
        // λ̂ = (4, 1, 0.01, 0.001), K = 2, β = 1 → c = 1·2¹ = 2,
        // tail λ̃₃ = 2/3, λ̃₄ = 0.5.
        let s = diag_spectrum(&[4.0, 1.0, 0.01, 0.001]);
        let cs = calibrate(&s, SpliceIndex::Fixed(2), TailExponent::Fixed(1.0)).unwrap();
        assert_eq!(cs.c, 2.0);
        assert_eq!(cs.eigenvalues[0], 4.0);
        assert_eq!(cs.eigenvalues[1], 1.0);
        assert!((cs.eigenvalues[2] - 2.0 / 3.0).abs() <= 1e-15);
        assert!((cs.eigenvalues[3] - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn calibrate_minimal_tail() {
        let s = diag_spectrum(&[4.0, 2.0, 1.0, 0.5]);
        let cs = calibrate(&s, SpliceIndex::Fixed(3), TailExponent::Fixed(2.0)).unwrap();
        assert_eq!(&cs.eigenvalues[..3], &[4.0, 2.0, 1.0]);
        // Only the last mode is replaced: c = 1·3², λ̃₄ = 9/16.
        assert!((cs.eigenvalues[3] - 9.0 / 16.0).abs() <= 1e-15);
    }

    #[test]
    fn calibrate_identity_on_exact_power_laws() {
        let d = 12;
        for beta in [0.5, 1.0, 2.0] {
            let evals: Vec<f64> = (1..=d).map(|i| 0.7 * (i as f64).powf(-beta)).collect();
            let s = diag_spectrum(&evals);
            for k in 1..d {
                let cs = calibrate(&s, SpliceIndex::Fixed(k), TailExponent::Fixed(beta)).unwrap();
                for (i, (&got, &want)) in cs.eigenvalues.iter().zip(&evals).enumerate() {
                    let rel = (got - want).abs() / want;
                    assert!(rel <= 1e-12, "mode {i}: {got} vs {want}");
                }
                // Continuity anchor.
                let at_splice = cs.c * (k as f64).powf(-beta);
                assert!((at_splice - evals[k - 1]).abs() <= 1e-12 * evals[k - 1]);
                // Head bit-identical.
                assert_eq!(&cs.eigenvalues[..k], &evals[..k]);
            }
        }
    }

    #[test]
    fn calibrate_auto_uses_noise_floor() {
        let s = diag_spectrum(&[1.0, 0.5, 0.1, 0.01, 0.001]);
        let nf = NoiseFloor {
            value: 0.05,
            method: FloorMethod::Theory,
            c0: Some(1.0),
        };
        let cs = calibrate(&s, SpliceIndex::Auto(nf), TailExponent::Fixed(1.0)).unwrap();
        assert_eq!(cs.k, 3);
    }

    #[test]
    fn calibrate_refused_when_nothing_recoverable() {
        let s = diag_spectrum(&[1.0, 0.5]);
        let nf = NoiseFloor {
            value: 10.0,
            method: FloorMethod::Theory,
            c0: Some(1.0),
        };
        assert!(matches!(
            calibrate(&s, SpliceIndex::Auto(nf), TailExponent::Fixed(1.0)),
            Err(SpectralError::CalibrationRefused(_))
        ));
    }

    #[test]
    fn calibrate_floors_negative_auto_beta() {
        // Flat spectrum: fitted slope 0; a rising head would be floored.
        let s = diag_spectrum(&[1.0, 1.0, 1.0, 1.0]);
        let cs = calibrate(&s, SpliceIndex::Fixed(3), TailExponent::Auto).unwrap();
        assert_eq!(cs.beta, 0.0);
        assert!(cs.beta_floored);
        // Flat tail at the anchor value.
        assert_eq!(cs.eigenvalues[3], 1.0);
    }

    #[test]
    fn calibrate_rejects_bad_fixed_arguments() {
        let s = diag_spectrum(&[1.0, 0.5, 0.25]);
        assert!(calibrate(&s, SpliceIndex::Fixed(0), TailExponent::Fixed(1.0)).is_err());
        assert!(calibrate(&s, SpliceIndex::Fixed(3), TailExponent::Fixed(1.0)).is_err());
        assert!(calibrate(&s, SpliceIndex::Fixed(1), TailExponent::Fixed(-1.0)).is_err());
    }

    fn decomposition(lambdas: &[f64], alphas_sq: &[f64]) -> SignalDecomposition {
        SignalDecomposition {
            lambdas: lambdas.to_vec(),
            alphas_sq: alphas_sq.to_vec(),
            class_id: 0,
            modes: lambdas.iter().filter(|&&l| l > 0.0).count(),
        }
    }

    #[test]
    fn calibrated_energy_on_power_law_matches_raw() {
        let evals: Vec<f64> = (1..=8).map(|i| (i as f64).powf(-1.5)).collect();
        let s = diag_spectrum(&evals);
        let sd = decomposition(&evals, &[1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005]);
        let cs = calibrate(&s, SpliceIndex::Fixed(4), TailExponent::Fixed(1.5)).unwrap();
        let raw = mahalanobis_energy(&sd, ModeCount::All).unwrap();
        let cal = calibrated_mahalanobis(&sd, &cs).unwrap();
        let rel = (cal.full_energy - raw.full_energy).abs() / raw.full_energy;
        assert!(rel <= 1e-12);
    }

    #[test]
    fn calibrated_energy_bounded_by_raw_when_tail_lifted() {
        // Noisy tail near zero inflates the raw energy; the lifted calibrated
        // tail can only shrink those per-mode terms.
        let raw_evals = [1.0, 0.5, 1e-6, 1e-7];
        let s = diag_spectrum(&raw_evals);
        let sd = decomposition(&raw_evals, &[0.4, 0.2, 0.1, 0.1]);
        let cs = calibrate(&s, SpliceIndex::Fixed(2), TailExponent::Fixed(1.0)).unwrap();
        let raw = mahalanobis_energy(&sd, ModeCount::All).unwrap();
        let cal = calibrated_mahalanobis(&sd, &cs).unwrap();
        for i in 2..4 {
            assert!(cs.eigenvalues[i] > raw_evals[i]);
            assert!(cal.per_mode[i] <= raw.per_mode[i]);
        }
        assert!(cal.full_energy <= raw.full_energy);
    }

    #[test]
    fn calibrated_energy_equals_truncated_when_tail_signal_zero() {
        let evals = [2.0, 1.0, 0.5, 0.25];
        let s = diag_spectrum(&evals);
        let sd = decomposition(&evals, &[1.0, 0.8, 0.0, 0.0]);
        let cs = calibrate(&s, SpliceIndex::Fixed(2), TailExponent::Fixed(1.0)).unwrap();
        let cal = calibrated_mahalanobis(&sd, &cs).unwrap();
        let trunc = mahalanobis_energy(&sd, ModeCount::First(2)).unwrap();
        assert!((cal.full_energy - trunc.truncated_energy).abs() <= 1e-12);
    }

    #[test]
    fn calibrated_fisher_trivial_tail_is_identity_direction() {
        let s = diag_spectrum(&[1.0, 1.0, 1.0]);
        let cs = calibrate(&s, SpliceIndex::Fixed(2), TailExponent::Fixed(0.0)).unwrap();
        let d = [0.3, -0.7, 0.2];
        let w = calibrated_fisher(&cs, &d).unwrap();
        for (wi, di) in w.iter().zip(&d) {
            assert!((wi - di).abs() <= 1e-12);
        }
    }

    #[test]
    fn calibrated_fisher_bounds_noisy_mode() {
        // Third eigenvalue far below the floor: the calibrated third
        // component is bounded by α₃/(c·3^{−β}) instead of α₃/ε.
        let s = diag_spectrum(&[4.0, 1.0, 1e-9]);
        let cs = calibrate(&s, SpliceIndex::Fixed(2), TailExponent::Fixed(1.0)).unwrap();
        let d = [1.0, 1.0, 1.0];
        let w = calibrated_fisher(&cs, &d).unwrap();
        let tail_lambda = cs.c * 3.0_f64.powf(-1.0);
        assert!((w[2] - 1.0 / tail_lambda).abs() <= 1e-12);
        assert!(w[2].abs() <= 1.0 / tail_lambda + 1e-12);
    }

    #[test]
    fn calibrated_fisher_on_power_law_matches_raw_fisher() {
        let evals: Vec<f64> = (1..=6).map(|i| (i as f64).powf(-2.0)).collect();
        let s = diag_spectrum(&evals);
        let cs = calibrate(&s, SpliceIndex::Fixed(3), TailExponent::Fixed(2.0)).unwrap();
        let d = [0.5, 0.4, 0.3, 0.2, 0.1, 0.05];
        let raw = fisher_direction(&s, &d, ModeCount::All).unwrap();
        let cal = calibrated_fisher(&cs, &d).unwrap();
        for (r, c) in raw.iter().zip(&cal) {
            assert!((r - c).abs() <= 1e-9 * r.abs().max(1.0));
        }
    }
}
