//! `classify`: one-vs-rest Fisher readout trained on one labeled file and
//! evaluated on another, reporting per-class and macro ROC-AUC, optionally
//! with the zeta-calibrated spectrum alongside the raw one.

use super::{FloorArg, TOOL_VERSION};
use crate::errors::CliError;
use crate::formats::{emit_json, read_labels, read_matrix, CalibrationBlock, InputMeta};
use clap::Args as ClapArgs;
use serde::Serialize;
use spectral_lab::diagnostics::{signal_decomposition, Contrast, FloorSpec};
use spectral_lab::matrix::{center, covariance, dot, eig_sym, DivisorConvention, EmbeddingSet, Matrix, Spectrum};
use spectral_lab::separation::{
    fisher_direction, gaussian_auc, macro_ovr_auc, mahalanobis_energy, AucResult, ModeCount,
};
use spectral_lab::zeta_filter::{calibrate, calibrated_fisher, SpliceIndex, TailExponent};
use spectral_lab::SpectralError;
use std::path::PathBuf;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Training matrix file.
    #[arg(long)]
    pub input: PathBuf,
    /// Training labels.
    #[arg(long)]
    pub labels: PathBuf,
    /// Test matrix file.
    #[arg(long)]
    pub test: PathBuf,
    /// Test labels.
    #[arg(long)]
    pub test_labels: PathBuf,
    /// Also score with the zeta-calibrated spectrum.
    #[arg(long)]
    pub calibrated: bool,
    /// Splice index for `--calibrated`, or `auto`.
    #[arg(long, default_value = "auto")]
    pub k: String,
    /// Tail exponent for `--calibrated`, or `auto`.
    #[arg(long, default_value = "auto")]
    pub beta: String,
    #[arg(long, value_enum, default_value = "theory")]
    pub noise_floor: FloorArg,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CalibratedBlock {
    macro_auc: f64,
    per_class_auc: Vec<f64>,
    calibration: CalibrationBlock,
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    tool_version: String,
    command: &'static str,
    train_input: InputMeta,
    train_labels_digest: String,
    test_input: InputMeta,
    test_labels_digest: String,
    classes: usize,
    /// Raw-spectrum readout: per-class Gaussian-link and empirical AUC.
    per_class: Vec<AucResult>,
    macro_auc: f64,
    /// Present with --calibrated when calibration was applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    calibrated: Option<CalibratedBlock>,
    /// Reason calibration fell back to the raw spectrum, when it did.
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration_refused: Option<String>,
}

/// Score matrix: column c holds wᵀx for the class-c direction.
fn score_matrix(test: &EmbeddingSet, directions: &[Vec<f64>]) -> Matrix {
    let mut scores = Matrix::zeros(test.n(), directions.len());
    for i in 0..test.n() {
        let row = test.data().row(i);
        for (c, w) in directions.iter().enumerate() {
            scores.set(i, c, dot(row, w));
        }
    }
    scores
}

fn class_counts(labels: &[usize], classes: usize) -> Vec<(usize, usize)> {
    (0..classes)
        .map(|c| {
            let pos = labels.iter().filter(|&&l| l == c).count();
            (pos, labels.len() - pos)
        })
        .collect()
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let train_loaded = read_matrix(&args.input)?;
    let (train_labels, train_labels_digest) = read_labels(&args.labels)?;
    let test_loaded = read_matrix(&args.test)?;
    let (test_labels, test_labels_digest) = read_labels(&args.test_labels)?;
    let train_meta = train_loaded.meta(&args.input);
    let test_meta = test_loaded.meta(&args.test);

    if train_loaded.matrix.cols() != test_loaded.matrix.cols() {
        return Err(SpectralError::Contract(format!(
            "dimension mismatch: train has D={}, test has D={}",
            train_loaded.matrix.cols(),
            test_loaded.matrix.cols()
        ))
        .into());
    }

    let train = EmbeddingSet::new(train_loaded.matrix, Some(train_labels))?;
    let test = EmbeddingSet::new(test_loaded.matrix, Some(test_labels.clone()))?;
    let classes = train.class_count();
    if let Some(&bad) = test_labels.iter().find(|&&l| l >= classes) {
        return Err(SpectralError::Contract(format!(
            "class {bad} present in test but absent in train"
        ))
        .into());
    }

    let centered = center(&train);
    let cov = covariance(&centered, DivisorConvention::Population)?;
    let spectrum = eig_sym(&cov)?;

    // One-vs-rest contrasts and raw Fisher directions.
    let mut contrasts = Vec::with_capacity(classes);
    let mut directions = Vec::with_capacity(classes);
    for c in 0..classes {
        let mu_c = train.class_mean(c, false)?;
        let mu_rest = train.class_mean(c, true)?;
        let d: Vec<f64> = mu_c.iter().zip(&mu_rest).map(|(a, b)| a - b).collect();
        directions.push(fisher_direction(&spectrum, &d, ModeCount::All)?);
        contrasts.push(d);
    }

    let scores = score_matrix(&test, &directions);
    let (macro_auc, per_class_auc) = macro_ovr_auc(&scores, test.labels().unwrap())?;
    let counts = class_counts(test.labels().unwrap(), classes);
    let per_class: Vec<AucResult> = (0..classes)
        .map(|c| -> Result<AucResult, CliError> {
            let sd = signal_decomposition(&spectrum, &train, Contrast::OneVsRest(c))?;
            let me = mahalanobis_energy(&sd, ModeCount::All)?;
            Ok(AucResult {
                gaussian_auc: gaussian_auc(me.full_energy)?,
                empirical_auc: per_class_auc[c],
                class_id: c,
                n_pos: counts[c].0,
                n_neg: counts[c].1,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut calibrated = None;
    let mut calibration_refused = None;
    if args.calibrated {
        match run_calibrated(args, &spectrum, &contrasts, &test) {
            Ok(block) => calibrated = Some(block),
            Err(CalibrationOutcome::Refused(reason)) => calibration_refused = Some(reason),
            Err(CalibrationOutcome::Fatal(e)) => return Err(e),
        }
    }

    let out = ClassifyOutput {
        tool_version: TOOL_VERSION.to_string(),
        command: "classify",
        train_input: train_meta,
        train_labels_digest,
        test_input: test_meta,
        test_labels_digest,
        classes,
        per_class,
        macro_auc,
        calibrated,
        calibration_refused,
    };
    emit_json(&out, args.output.as_deref())
}

enum CalibrationOutcome {
    Refused(String),
    Fatal(CliError),
}

fn run_calibrated(
    args: &Args,
    spectrum: &Spectrum,
    contrasts: &[Vec<f64>],
    test: &EmbeddingSet,
) -> Result<CalibratedBlock, CalibrationOutcome> {
    let splice = match args.k.as_str() {
        "auto" => {
            let floor = match args.noise_floor.to_floor_spec(args.c0) {
                FloorSpec::Theory { c0 } => {
                    spectral_lab::diagnostics::noise_floor_theory(spectrum, c0)
                        .map_err(|e| CalibrationOutcome::Fatal(e.into()))?
                }
                FloorSpec::SplitHalf => {
                    return Err(CalibrationOutcome::Fatal(CliError::config(
                        "--noise-floor split-half is unavailable for classify; use --c0/theory",
                    )))
                }
            };
            SpliceIndex::Auto(floor)
        }
        raw => SpliceIndex::Fixed(raw.parse::<usize>().map_err(|_| {
            CalibrationOutcome::Fatal(CliError::config(format!(
                "--k expects a positive integer or `auto`, got `{raw}`"
            )))
        })?),
    };
    let tail = match args.beta.as_str() {
        "auto" => TailExponent::Auto,
        raw => TailExponent::Fixed(raw.parse::<f64>().map_err(|_| {
            CalibrationOutcome::Fatal(CliError::config(format!(
                "--beta expects a real number or `auto`, got `{raw}`"
            )))
        })?),
    };

    let cs = match calibrate(spectrum, splice, tail) {
        Ok(cs) => cs,
        Err(SpectralError::CalibrationRefused(reason)) => {
            eprintln!("warning: calibration refused, reporting raw scores only: {reason}");
            return Err(CalibrationOutcome::Refused(reason));
        }
        Err(e) => return Err(CalibrationOutcome::Fatal(e.into())),
    };
    if cs.beta_floored {
        eprintln!(
            "warning: fitted tail exponent was not positive; using a flat tail (beta = 0)"
        );
    }

    let mut directions = Vec::with_capacity(contrasts.len());
    for d in contrasts {
        directions.push(
            calibrated_fisher(&cs, d).map_err(|e| CalibrationOutcome::Fatal(e.into()))?,
        );
    }
    let scores = score_matrix(test, &directions);
    let (macro_auc, per_class_auc) = macro_ovr_auc(&scores, test.labels().unwrap())
        .map_err(|e| CalibrationOutcome::Fatal(e.into()))?;
    Ok(CalibratedBlock {
        macro_auc,
        per_class_auc,
        calibration: CalibrationBlock {
            method: "zeta_filter".to_string(),
            k: cs.k,
            beta: cs.beta,
            c: cs.c,
            beta_floored: cs.beta_floored,
        },
    })
}
