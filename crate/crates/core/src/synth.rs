//! Synthetic two-class Gaussian lab with known population truth, and a
//! seeded Monte-Carlo sweep harness over sample sizes.
//!
//! The population covariance is Σ = U·diag(i^{−β})·Uᵀ for a seeded random
//! orthogonal U, and the class means differ by d = Σ a_i·u_i, so every
//! diagnostic has a closed form to compare against (for example
//! d_M² = Σ a_i²·i^β). Spreading the signal coefficients away from the
//! leading modes reproduces the high-variance-nuisance setting where the
//! directions that dominate the spectrum carry no class signal.
//!
//! Determinism contract: a sweep is a pure function of
//! (spec, n_grid, trials, config). Every (N, trial) row owns its PRNG
//! stream, derived with [`crate::rng::mix_seed`], so rows can run on any
//! number of workers in any order and still assemble into identical output
//! bytes. Sampling draws x = μ_c + Σ^{1/2}·z with Σ^{1/2} taken from the
//! population eigendecomposition (exact, since Σ is constructed spectrally)
//! and z standard normal via Box–Muller.
//!
//! The sweep estimates the shared class-conditional covariance, so it
//! centers each class at its own mean before the covariance step; with the
//! global mean removed instead, the between-class term d·dᵀ/4 would sit in
//! the estimate forever and no comparison against the population Σ would
//! converge.

use crate::diagnostics::{
    effective_rank, recoverable_dimension, signal_decomposition, spectral_slope,
    structural_dimensionality, Contrast, FloorSpec,
};
use crate::error::{Result, SpectralError};
use crate::matrix::{
    center_within_class, covariance, dot, eig_sym, op_norm_sym_diff, principal_angles,
    CovarianceMatrix, DivisorConvention, EmbeddingSet, Matrix, Spectrum,
};
use crate::rng::{mix_seed, SplitMix64};
use crate::separation::{fisher_direction, mahalanobis_energy, roc_auc, ModeCount};
use crate::zeta_filter::{calibrate, calibrated_fisher, SpliceIndex, TailExponent};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Stream tags for [`crate::rng::mix_seed`].
const STREAM_TRAIN: u64 = 0;
const STREAM_HELD_OUT: u64 = 1;

/// Generator parameters for the synthetic lab.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Embedding dimension D ≥ 2.
    pub d: usize,
    /// Population spectral exponent: λ_i = i^{−β}, β ≥ 0.
    pub beta: f64,
    /// Class-difference coefficients a_i in the population eigenbasis;
    /// length ≤ D, padded with zeros.
    pub signal: Vec<f64>,
    /// Default samples per class for callers that do not pass an explicit N.
    pub n_per_class: usize,
    /// Seed for the random orthogonal population basis U.
    pub rotation_seed: u64,
    /// Base seed for all sample draws.
    pub noise_seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(SpectralError::Contract(format!(
                "dimension must be at least 2, got {}",
                self.d
            )));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(SpectralError::Contract(format!(
                "spectral exponent must be a finite non-negative real, got {}",
                self.beta
            )));
        }
        if self.signal.len() > self.d {
            return Err(SpectralError::Contract(format!(
                "signal has {} coefficients for dimension {}",
                self.signal.len(),
                self.d
            )));
        }
        if self.signal.iter().any(|a| !a.is_finite()) {
            return Err(SpectralError::Contract(
                "signal coefficients must be finite".into(),
            ));
        }
        if self.n_per_class < 2 {
            return Err(SpectralError::Contract(format!(
                "need at least 2 samples per class, got {}",
                self.n_per_class
            )));
        }
        Ok(())
    }
}

/// Population truth generated from a [`SyntheticSpec`].
#[derive(Debug, Clone)]
pub struct Population {
    pub spec: SyntheticSpec,
    /// Σ = U·diag(i^{−β})·Uᵀ.
    pub sigma: CovarianceMatrix,
    /// Population spectrum: eigenvalues i^{−β} with eigenvectors U.
    pub spectrum: Spectrum,
    /// Class means ∓d/2, so the mixture mean is zero.
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Closed-form Mahalanobis energy Σ a_i²·i^β.
    pub d_m_squared: f64,
    /// Symmetric square root U·diag(i^{−β/2})·Uᵀ used by the sampler.
    sqrt_sigma: Matrix,
}

impl Population {
    /// μ₁ − μ₀.
    pub fn mean_difference(&self) -> Vec<f64> {
        self.mu1
            .iter()
            .zip(&self.mu0)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Orthonormalize the columns of a square matrix by modified Gram–Schmidt
/// with one re-orthogonalization pass. The diagonal of the implicit R factor
/// is positive by construction, which fixes the sign convention.
fn orthonormal_columns(g: &Matrix) -> Result<Matrix> {
    let d = g.rows();
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| g.column(j)).collect();
    for j in 0..d {
        let mut col = std::mem::take(&mut cols[j]);
        for _pass in 0..2 {
            for prev in cols.iter().take(j) {
                let proj = dot(prev, &col);
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= proj * p;
                }
            }
        }
        let norm = dot(&col, &col).sqrt();
        if norm < 1e-12 {
            return Err(SpectralError::Numerical(
                "degenerate column while orthonormalizing the rotation basis".into(),
            ));
        }
        for c in col.iter_mut() {
            *c /= norm;
        }
        cols[j] = col;
    }
    let mut u = Matrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            u.set(i, j, x);
        }
    }
    Ok(u)
}

/// (U·diag)·Uᵀ, symmetrized exactly.
fn rotated_diagonal(u: &Matrix, diag: &[f64]) -> Result<Matrix> {
    let d = u.rows();
    let mut ud = Matrix::zeros(d, d);
    for (j, &scale) in diag.iter().enumerate() {
        for i in 0..d {
            ud.set(i, j, u.get(i, j) * scale);
        }
    }
    let mut m = ud.matmul(&u.transpose())?;
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}

/// Build the population truth: seeded orthogonal basis, power-law spectrum,
/// class means, and the closed-form Mahalanobis energy.
pub fn gen_population(spec: &SyntheticSpec) -> Result<Population> {
    spec.validate()?;
    let d = spec.d;
    let mut rng = SplitMix64::new(spec.rotation_seed);
    let mut g = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g.set(i, j, rng.next_gaussian());
        }
    }
    let u = orthonormal_columns(&g)?;

    let lambdas: Vec<f64> = (1..=d).map(|i| (i as f64).powf(-spec.beta)).collect();
    let sqrt_lambdas: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let sigma = rotated_diagonal(&u, &lambdas)?;
    let sqrt_sigma = rotated_diagonal(&u, &sqrt_lambdas)?;

    let mut coeffs = spec.signal.clone();
    coeffs.resize(d, 0.0);
    let diff = u.matvec(&coeffs)?;
    let mu1: Vec<f64> = diff.iter().map(|x| 0.5 * x).collect();
    let mu0: Vec<f64> = diff.iter().map(|x| -0.5 * x).collect();

    let d_m_squared = spec
        .signal
        .iter()
        .enumerate()
        .map(|(i, a)| a * a * ((i + 1) as f64).powf(spec.beta))
        .sum();

    Ok(Population {
        spec: spec.clone(),
        sigma: CovarianceMatrix::from_entries(sigma, DivisorConvention::Population, 0)?,
        spectrum: Spectrum::new(lambdas.clone(), lambdas, u, 0),
        mu0,
        mu1,
        d_m_squared,
        sqrt_sigma,
    })
}

fn sample_stream(pop: &Population, n_total: usize, trial: u64, tag: u64) -> Result<EmbeddingSet> {
    let per_class = n_total / 2;
    if per_class < 2 {
        return Err(SpectralError::Contract(format!(
            "need at least 2 samples per class, so N ≥ 4; got N = {n_total}"
        )));
    }
    let d = pop.spec.d;
    let seed = mix_seed(pop.spec.noise_seed, n_total as u64, trial, tag);
    let mut rng = SplitMix64::new(seed);
    let mut data = Matrix::zeros(2 * per_class, d);
    let mut z = vec![0.0; d];
    let mut labels = Vec::with_capacity(2 * per_class);
    for class in 0..2usize {
        let mu = if class == 0 { &pop.mu0 } else { &pop.mu1 };
        for row in 0..per_class {
            rng.fill_gaussian(&mut z);
            let x = pop.sqrt_sigma.matvec(&z)?;
            let r = class * per_class + row;
            for (j, (m, v)) in mu.iter().zip(&x).enumerate() {
                data.set(r, j, m + v);
            }
            labels.push(class);
        }
    }
    EmbeddingSet::new(data, Some(labels))
}

/// Draw N total samples (N/2 per class, odd N rounded down) from the
/// population, labeled 0/1. Bit-identical for identical (spec, N, trial).
pub fn sample(pop: &Population, n_total: usize, trial: u64) -> Result<EmbeddingSet> {
    sample_stream(pop, n_total, trial, STREAM_TRAIN)
}

/// Like [`sample`] but from an independent stream, for held-out evaluation
/// sets that must not overlap the training draw of the same trial.
pub fn sample_held_out(pop: &Population, n_total: usize, trial: u64) -> Result<EmbeddingSet> {
    sample_stream(pop, n_total, trial, STREAM_HELD_OUT)
}

/// Per-sweep configuration: thresholds, floor estimator, subspace sizes,
/// held-out set size, and the master seed echoed into the output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub variance_fraction: f64,
    pub tau: f64,
    pub floor: FloorSpec,
    pub k_list: Vec<usize>,
    pub n_test: usize,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variance_fraction: 0.95,
            tau: 0.1,
            floor: FloorSpec::Theory { c0: 1.0 },
            k_list: vec![1, 2, 4],
            n_test: 2048,
            master_seed: 0,
        }
    }
}

/// One (N, trial) record. Failed rows keep their key and carry the failure
/// reason; every other field is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub trial: u64,
    pub effective_rank: Option<usize>,
    /// Structural dimensionality per class (one-vs-rest), classes 0 and 1.
    pub k_structural: Vec<usize>,
    /// Full Mahalanobis energy d_M² per class.
    pub me_sq_full: Vec<f64>,
    /// Truncated Mahalanobis energy d_M²(N) per class.
    pub me_sq_truncated: Vec<f64>,
    pub recoverable_dim: Option<usize>,
    pub beta: Option<f64>,
    pub beta_r_squared: Option<f64>,
    pub noise_floor: Option<f64>,
    /// ‖Σ̂ − Σ‖_op against the population covariance.
    pub true_op_err: Option<f64>,
    /// Largest principal-angle sine vs the population basis, per k in k_list.
    pub sin_theta: Vec<f64>,
    /// Davis–Kahan bound from the true operator error and the population
    /// eigengaps, per k in k_list.
    pub dk_bound: Vec<f64>,
    pub auc_raw: Option<f64>,
    pub auc_calibrated: Option<f64>,
    /// False when calibration was refused and the raw score was carried over.
    pub calibration_applied: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(n: usize, trial: u64, reason: String) -> Self {
        SweepRow {
            n,
            trial,
            effective_rank: None,
            k_structural: Vec::new(),
            me_sq_full: Vec::new(),
            me_sq_truncated: Vec::new(),
            recoverable_dim: None,
            beta: None,
            beta_r_squared: None,
            noise_floor: None,
            true_op_err: None,
            sin_theta: Vec::new(),
            dk_bound: Vec::new(),
            auc_raw: None,
            auc_calibrated: None,
            calibration_applied: false,
            error: Some(reason),
        }
    }
}

/// Complete sweep output: spec snapshot, config echo, and one row per
/// (N, trial).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SyntheticSpec,
    pub config: SweepConfig,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub rows: Vec<SweepRow>,
}

/// Log-log scaling fit of a sweep field against N.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// None when the response is constant (undefined).
    pub r_squared: Option<f64>,
}

fn validate_sweep_inputs(
    spec: &SyntheticSpec,
    n_grid: &[usize],
    trials: usize,
    config: &SweepConfig,
) -> Result<()> {
    spec.validate()?;
    if n_grid.is_empty() {
        return Err(SpectralError::Contract("empty N grid".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectralError::Contract(
            "N grid must be strictly ascending".into(),
        ));
    }
    if trials < 1 {
        return Err(SpectralError::Contract("need at least 1 trial".into()));
    }
    if config.k_list.is_empty() {
        return Err(SpectralError::Contract("empty k list".into()));
    }
    if config.k_list.iter().any(|&k| k < 1 || k >= spec.d) {
        return Err(SpectralError::Contract(format!(
            "every k must lie in [1, {}), got {:?}",
            spec.d, config.k_list
        )));
    }
    if config.n_test < 4 {
        return Err(SpectralError::Contract(
            "held-out set needs at least 4 samples".into(),
        ));
    }
    if !(config.variance_fraction > 0.0 && config.variance_fraction <= 1.0) {
        return Err(SpectralError::Contract(
            "variance fraction outside (0, 1]".into(),
        ));
    }
    if config.tau <= 0.0 || config.tau.is_nan() {
        return Err(SpectralError::Contract(
            "structural threshold must be positive".into(),
        ));
    }
    Ok(())
}

fn row_inner(pop: &Population, n: usize, trial: u64, config: &SweepConfig) -> Result<SweepRow> {
    let train = sample(pop, n, trial)?;
    let within = center_within_class(&train)?;
    let cov = covariance(&within, DivisorConvention::Population)?;
    let spectrum = eig_sym(&cov)?;

    let eff_rank = effective_rank(&spectrum, config.variance_fraction)?;
    let floor = config.floor.compute(&spectrum, &within)?;
    let k_recoverable = recoverable_dimension(&spectrum, &floor);
    let fit_hi = k_recoverable.max(5).min(spectrum.d());
    let slope = spectral_slope(&spectrum, 1, fit_hi)?;

    let mut k_structural = Vec::with_capacity(2);
    let mut me_sq_full = Vec::with_capacity(2);
    let mut me_sq_truncated = Vec::with_capacity(2);
    for class in 0..2usize {
        let sd = signal_decomposition(&spectrum, &train, Contrast::OneVsRest(class))?;
        k_structural.push(structural_dimensionality(&sd, config.tau));
        let me = mahalanobis_energy(&sd, ModeCount::First(k_recoverable))?;
        me_sq_full.push(me.full_energy);
        me_sq_truncated.push(me.truncated_energy);
    }

    let true_op_err = op_norm_sym_diff(&cov, &pop.sigma)?;
    let mut sin_theta = Vec::with_capacity(config.k_list.len());
    let mut dk_bound = Vec::with_capacity(config.k_list.len());
    for &k in &config.k_list {
        sin_theta.push(principal_angles(&pop.spectrum, &spectrum, k)?.max_sine());
        dk_bound.push(crate::diagnostics::davis_kahan_bound(
            true_op_err,
            &pop.spectrum,
            k,
        )?);
    }

    let test = sample_held_out(pop, config.n_test, trial)?;
    let mu1 = train.class_mean(1, false)?;
    let mu0 = train.class_mean(0, false)?;
    let diff: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();

    let score_split = |w: &[f64]| -> Result<f64> {
        let labels = test.labels().expect("held-out draw is labeled");
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let s = dot(test.data().row(i), w);
            if l == 1 {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        roc_auc(&pos, &neg)
    };

    let w_raw = fisher_direction(&spectrum, &diff, ModeCount::All)?;
    let auc_raw = score_split(&w_raw)?;

    let (auc_calibrated, calibration_applied) = match calibrate(
        &spectrum,
        SpliceIndex::Auto(floor),
        TailExponent::Fixed(slope.beta.max(0.0)),
    ) {
        Ok(cs) => {
            let w_cal = calibrated_fisher(&cs, &diff)?;
            (score_split(&w_cal)?, true)
        }
        Err(SpectralError::CalibrationRefused(_)) => (auc_raw, false),
        Err(e) => return Err(e),
    };

    Ok(SweepRow {
        n,
        trial,
        effective_rank: Some(eff_rank),
        k_structural,
        me_sq_full,
        me_sq_truncated,
        recoverable_dim: Some(k_recoverable),
        beta: Some(slope.beta),
        beta_r_squared: slope.r_squared,
        noise_floor: Some(floor.value),
        true_op_err: Some(true_op_err),
        sin_theta,
        dk_bound,
        auc_raw: Some(auc_raw),
        auc_calibrated: Some(auc_calibrated),
        calibration_applied,
        error: None,
    })
}

fn compute_row(pop: &Population, n: usize, trial: u64, config: &SweepConfig) -> SweepRow {
    match row_inner(pop, n, trial, config) {
        Ok(row) => row,
        Err(e) => SweepRow::failed(n, trial, e.to_string()),
    }
}

fn assemble(
    spec: &SyntheticSpec,
    n_grid: &[usize],
    trials: usize,
    config: &SweepConfig,
    rows: Vec<SweepRow>,
) -> SweepResult {
    SweepResult {
        spec: spec.clone(),
        config: config.clone(),
        n_grid: n_grid.to_vec(),
        trials,
        rows,
    }
}

fn jobs(n_grid: &[usize], trials: usize) -> Vec<(usize, u64)> {
    let mut v = Vec::with_capacity(n_grid.len() * trials);
    for &n in n_grid {
        for t in 0..trials {
            v.push((n, t as u64));
        }
    }
    v
}

/// Run the sweep strictly sequentially. Always available; this is also the
/// fallback `run_sweep` compiles down to without the `parallel` feature.
pub fn run_sweep_serial(
    spec: &SyntheticSpec,
    n_grid: &[usize],
    trials: usize,
    config: &SweepConfig,
) -> Result<SweepResult> {
    validate_sweep_inputs(spec, n_grid, trials, config)?;
    let pop = gen_population(spec)?;
    let rows: Vec<SweepRow> = jobs(n_grid, trials)
        .iter()
        .map(|&(n, t)| compute_row(&pop, n, t, config))
        .collect();
    Ok(assemble(spec, n_grid, trials, config, rows))
}

/// Run the sweep, one row per (N, trial), with every diagnostic plus the
/// true-vs-empirical operator error, subspace angles against the population
/// basis, and raw/calibrated Fisher AUC on a held-out draw.
///
/// With the `parallel` feature the rows execute on the current rayon pool;
/// output is identical to the serial run for any worker count.
#[cfg(feature = "parallel")]
pub fn run_sweep(
    spec: &SyntheticSpec,
    n_grid: &[usize],
    trials: usize,
    config: &SweepConfig,
) -> Result<SweepResult> {
    validate_sweep_inputs(spec, n_grid, trials, config)?;
    let pop = gen_population(spec)?;
    let rows: Vec<SweepRow> = jobs(n_grid, trials)
        .par_iter()
        .map(|&(n, t)| compute_row(&pop, n, t, config))
        .collect();
    Ok(assemble(spec, n_grid, trials, config, rows))
}

#[cfg(not(feature = "parallel"))]
pub fn run_sweep(
    spec: &SyntheticSpec,
    n_grid: &[usize],
    trials: usize,
    config: &SweepConfig,
) -> Result<SweepResult> {
    run_sweep_serial(spec, n_grid, trials, config)
}

/// Format a float the way every serializer in this crate does: shortest
/// string that round-trips.
fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl SweepResult {
    /// Column names of the CSV layout, in order.
    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec![
            "n".to_string(),
            "trial".to_string(),
            "effective_rank".to_string(),
        ];
        for c in 0..2 {
            h.push(format!("k_structural_class{c}"));
        }
        for c in 0..2 {
            h.push(format!("me_sq_full_class{c}"));
            h.push(format!("me_sq_truncated_class{c}"));
        }
        h.extend(
            [
                "recoverable_dim",
                "beta",
                "beta_r_squared",
                "noise_floor",
                "true_op_err",
            ]
            .map(String::from),
        );
        for &k in &self.config.k_list {
            h.push(format!("sin_theta_k{k}"));
        }
        for &k in &self.config.k_list {
            h.push(format!("dk_bound_k{k}"));
        }
        h.extend(["auc_raw", "auc_calibrated", "calibration_applied", "error"].map(String::from));
        h
    }

    fn csv_row(&self, row: &SweepRow) -> Vec<String> {
        let kl = self.config.k_list.len();
        let mut cells = vec![
            row.n.to_string(),
            row.trial.to_string(),
            row.effective_rank.map(|v| v.to_string()).unwrap_or_default(),
        ];
        for c in 0..2 {
            cells.push(
                row.k_structural
                    .get(c)
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            );
        }
        for c in 0..2 {
            cells.push(fmt_opt(row.me_sq_full.get(c).copied()));
            cells.push(fmt_opt(row.me_sq_truncated.get(c).copied()));
        }
        cells.push(row.recoverable_dim.map(|v| v.to_string()).unwrap_or_default());
        cells.push(fmt_opt(row.beta));
        cells.push(fmt_opt(row.beta_r_squared));
        cells.push(fmt_opt(row.noise_floor));
        cells.push(fmt_opt(row.true_op_err));
        for i in 0..kl {
            cells.push(fmt_opt(row.sin_theta.get(i).copied()));
        }
        for i in 0..kl {
            cells.push(fmt_opt(row.dk_bound.get(i).copied()));
        }
        cells.push(fmt_opt(row.auc_raw));
        cells.push(fmt_opt(row.auc_calibrated));
        cells.push(row.calibration_applied.to_string());
        cells.push(row.error.clone().unwrap_or_default().replace(',', ";"));
        cells
    }

    /// One header line plus one line per (N, trial) row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.csv_header().join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.csv_row(row).join(","));
            out.push('\n');
        }
        out
    }

    /// Nested JSON with the spec snapshot and config echo.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| SpectralError::Contract(format!("serialization failed: {e}")))
    }

    /// Numeric value of a named CSV column for one row, when present.
    pub fn field_of(&self, row: &SweepRow, field: &str) -> Option<f64> {
        let k_index = |prefix: &str| {
            field
                .strip_prefix(prefix)
                .and_then(|s| s.parse::<usize>().ok())
                .and_then(|k| self.config.k_list.iter().position(|&x| x == k))
        };
        match field {
            "n" => Some(row.n as f64),
            "effective_rank" => row.effective_rank.map(|v| v as f64),
            "recoverable_dim" => row.recoverable_dim.map(|v| v as f64),
            "beta" => row.beta,
            "beta_r_squared" => row.beta_r_squared,
            "noise_floor" => row.noise_floor,
            "true_op_err" => row.true_op_err,
            "auc_raw" => row.auc_raw,
            "auc_calibrated" => row.auc_calibrated,
            _ => {
                if let Some(rest) = field.strip_prefix("k_structural_class") {
                    let c: usize = rest.parse().ok()?;
                    return row.k_structural.get(c).map(|&v| v as f64);
                }
                if let Some(rest) = field.strip_prefix("me_sq_full_class") {
                    let c: usize = rest.parse().ok()?;
                    return row.me_sq_full.get(c).copied();
                }
                if let Some(rest) = field.strip_prefix("me_sq_truncated_class") {
                    let c: usize = rest.parse().ok()?;
                    return row.me_sq_truncated.get(c).copied();
                }
                if let Some(i) = k_index("sin_theta_k") {
                    return row.sin_theta.get(i).copied();
                }
                if let Some(i) = k_index("dk_bound_k") {
                    return row.dk_bound.get(i).copied();
                }
                None
            }
        }
    }

    /// Median of a field over the trials at each N, ascending in N. Failed
    /// rows are skipped; an N with no surviving rows is an error.
    pub fn medians_by_n(&self, field: &str) -> Result<Vec<(usize, f64)>> {
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for row in &self.rows {
            if row.error.is_some() {
                continue;
            }
            let v = self.field_of(row, field).ok_or_else(|| {
                SpectralError::Contract(format!("unknown or absent sweep field `{field}`"))
            })?;
            groups.entry(row.n).or_default().push(v);
        }
        if groups.len() != self.n_grid.len() {
            return Err(SpectralError::Contract(format!(
                "field `{field}` has data for {} of {} grid points",
                groups.len(),
                self.n_grid.len()
            )));
        }
        Ok(groups
            .into_iter()
            .map(|(n, mut vs)| {
                vs.sort_by(f64::total_cmp);
                let m = vs.len();
                let median = if m % 2 == 1 {
                    vs[m / 2]
                } else {
                    0.5 * (vs[m / 2 - 1] + vs[m / 2])
                };
                (n, median)
            })
            .collect())
    }
}

/// OLS of log(median-over-trials of `field`) on log N. Non-positive medians
/// cannot enter a log fit and are an error; at least 3 distinct N are
/// required.
pub fn scaling_fit(sr: &SweepResult, field: &str) -> Result<ScalingFit> {
    let medians = sr.medians_by_n(field)?;
    if medians.len() < 3 {
        return Err(SpectralError::Contract(format!(
            "scaling fit needs at least 3 distinct N values, got {}",
            medians.len()
        )));
    }
    let mut xs = Vec::with_capacity(medians.len());
    let mut ys = Vec::with_capacity(medians.len());
    for (n, m) in &medians {
        if *m <= 0.0 {
            return Err(SpectralError::Contract(format!(
                "median of `{field}` at N={n} is {m}, not positive; log fit undefined"
            )));
        }
        xs.push((*n as f64).ln());
        ys.push(m.ln());
    }
    let (slope, intercept, r_squared) = crate::diagnostics::ols(&xs, &ys)?;
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            d: 8,
            beta: 1.0,
            signal: vec![1.0, 0.5],
            n_per_class: 64,
            rotation_seed: 11,
            noise_seed: 22,
        }
    }

    #[test]
    fn population_isotropic_when_beta_zero() {
        let spec = SyntheticSpec {
            beta: 0.0,
            ..small_spec()
        };
        let pop = gen_population(&spec).unwrap();
        assert!(pop.spectrum.eigenvalues().iter().all(|&l| l == 1.0));
        // UUᵀ = I, so Σ ≈ I.
        assert!(pop.sigma.entries().max_abs_diff(&Matrix::identity(8)) <= 1e-12);
    }

    #[test]
    fn population_closed_form_energy() {
        let spec = SyntheticSpec {
            signal: vec![2.0],
            beta: 1.7,
            ..small_spec()
        };
        let pop = gen_population(&spec).unwrap();
        assert!((pop.d_m_squared - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn population_reproducible_bit_exact() {
        let spec = small_spec();
        let a = gen_population(&spec).unwrap();
        let b = gen_population(&spec).unwrap();
        assert_eq!(
            a.spectrum.eigenvectors().as_slice(),
            b.spectrum.eigenvectors().as_slice()
        );
        assert_eq!(a.sigma.entries().as_slice(), b.sigma.entries().as_slice());
    }

    #[test]
    fn population_basis_is_orthonormal() {
        let pop = gen_population(&small_spec()).unwrap();
        let u = pop.spectrum.eigenvectors();
        let utu = u.transpose().matmul(u).unwrap();
        assert!(utu.max_abs_diff(&Matrix::identity(8)) <= 1e-12);
    }

    #[test]
    fn sample_labels_and_rounding() {
        let pop = gen_population(&small_spec()).unwrap();
        let e = sample(&pop, 4, 0).unwrap();
        assert_eq!(e.n(), 4);
        assert_eq!(e.labels(), Some(&[0, 0, 1, 1][..]));
        // Odd N rounds down per class.
        let e = sample(&pop, 9, 0).unwrap();
        assert_eq!(e.n(), 8);
    }

    #[test]
    fn sample_deterministic() {
        let pop = gen_population(&small_spec()).unwrap();
        let a = sample(&pop, 32, 3).unwrap();
        let b = sample(&pop, 32, 3).unwrap();
        assert_eq!(a.data().as_slice(), b.data().as_slice());
        let c = sample(&pop, 32, 4).unwrap();
        assert_ne!(a.data().as_slice(), c.data().as_slice());
        let d = sample_held_out(&pop, 32, 3).unwrap();
        assert_ne!(a.data().as_slice(), d.data().as_slice());
    }

    #[test]
    fn sample_covariance_converges_to_population() {
        let spec = SyntheticSpec {
            d: 8,
            beta: 1.0,
            signal: vec![1.0, 0.5],
            n_per_class: 64,
            rotation_seed: 5,
            noise_seed: 6,
        };
        let pop = gen_population(&spec).unwrap();
        let e = sample(&pop, 100_000, 0).unwrap();
        let within = center_within_class(&e).unwrap();
        let cov = covariance(&within, DivisorConvention::Population).unwrap();
        let mut diff = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let d = cov.entries().get(i, j) - pop.sigma.entries().get(i, j);
                diff += d * d;
            }
        }
        let rel = diff.sqrt() / pop.sigma.entries().frobenius_norm();
        assert!(rel <= 0.05, "relative Frobenius error {rel:.4}");
    }

    #[test]
    fn sweep_smoke_single_row() {
        let spec = small_spec();
        let config = SweepConfig {
            k_list: vec![1, 2],
            n_test: 64,
            ..SweepConfig::default()
        };
        let sr = run_sweep(&spec, &[64], 1, &config).unwrap();
        assert_eq!(sr.rows.len(), 1);
        let row = &sr.rows[0];
        assert!(row.error.is_none(), "{:?}", row.error);
        assert!(row.effective_rank.is_some());
        assert_eq!(row.k_structural.len(), 2);
        assert_eq!(row.sin_theta.len(), 2);
        assert!(row.auc_raw.is_some());
        assert!(row.auc_calibrated.is_some());
    }

    #[test]
    fn sweep_serial_and_parallel_agree() {
        let spec = small_spec();
        let config = SweepConfig {
            k_list: vec![1, 2],
            n_test: 64,
            ..SweepConfig::default()
        };
        let a = run_sweep(&spec, &[32, 64], 3, &config).unwrap();
        let b = run_sweep_serial(&spec, &[32, 64], 3, &config).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let spec = small_spec();
        let config = SweepConfig::default();
        assert!(run_sweep(&spec, &[], 1, &config).is_err());
        assert!(run_sweep(&spec, &[64, 64], 1, &config).is_err());
        assert!(run_sweep(&spec, &[64], 0, &config).is_err());
    }

    #[test]
    fn scaling_fit_constant_field_has_undefined_r2() {
        let spec = small_spec();
        let mut sr = run_sweep(&spec, &[32, 64, 128], 2, &SweepConfig {
            k_list: vec![1],
            n_test: 64,
            ..SweepConfig::default()
        })
        .unwrap();
        for row in &mut sr.rows {
            row.noise_floor = Some(3.0);
        }
        let fit = scaling_fit(&sr, "noise_floor").unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!(fit.r_squared.is_none());
    }

    #[test]
    fn scaling_fit_rejects_non_positive_medians() {
        let spec = small_spec();
        let mut sr = run_sweep(&spec, &[32, 64, 128], 2, &SweepConfig {
            k_list: vec![1],
            n_test: 64,
            ..SweepConfig::default()
        })
        .unwrap();
        for row in &mut sr.rows {
            row.beta = Some(0.0);
        }
        assert!(scaling_fit(&sr, "beta").is_err());
    }

    #[test]
    fn csv_layout_matches_header() {
        let spec = small_spec();
        let config = SweepConfig {
            k_list: vec![1, 3],
            n_test: 64,
            ..SweepConfig::default()
        };
        let sr = run_sweep(&spec, &[64], 2, &config).unwrap();
        let csv = sr.to_csv();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), sr.csv_header().len());
        assert!(header.contains(&"sin_theta_k3"));
        for line in lines {
            assert_eq!(line.split(',').count(), header.len());
        }
    }
}
