//! `zeta-filter`: replace the noise-dominated tail of a spectrum with a
//! continuous power-law decay and write the calibrated spectrum with full
//! provenance. Accepts either a spectrum JSON document (as produced by
//! `spectrum`) or a raw matrix file.

use super::{pipeline_spectrum, FloorArg, OutputFormat, TOOL_VERSION};
use crate::errors::CliError;
use crate::formats::{
    emit_json, looks_like_json, read_matrix, read_spectrum_file, CalibrationBlock, InputMeta,
    SpectrumFile,
};
use clap::Args as ClapArgs;
use spectral_lab::diagnostics::FloorSpec;
use spectral_lab::matrix::{DivisorConvention, Matrix, Spectrum};
use spectral_lab::zeta_filter::{calibrate, SpliceIndex, TailExponent};
use std::path::PathBuf;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Spectrum JSON or matrix file (CSV / SPL1 binary).
    #[arg(long)]
    pub input: PathBuf,
    /// JSON configuration; its `zeta {k, beta}` block fills in values the
    /// flags leave on `auto`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Splice index, or `auto` for the recoverable dimension.
    #[arg(long, default_value = "auto")]
    pub k: String,
    /// Tail exponent, or `auto` to fit it over the head.
    #[arg(long, default_value = "auto")]
    pub beta: String,
    /// Floor estimator behind `--k auto`.
    #[arg(long, value_enum, default_value = "theory")]
    pub noise_floor: FloorArg,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print K, β, and c without writing anything.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    // Load the spectrum, from JSON or from a raw matrix.
    let (spectrum, mut base): (Spectrum, SpectrumFile) = if looks_like_json(&args.input)? {
        let (file, digest) = read_spectrum_file(&args.input)?;
        let d = file.eigenvalues.len();
        let vectors = match &file.eigenvectors {
            Some(cols) => {
                let mut m = Matrix::zeros(d, cols.len());
                for (j, col) in cols.iter().enumerate() {
                    if col.len() != d {
                        return Err(CliError::io(format!(
                            "spectrum file {}: eigenvector column {j} has length {}, expected {d}",
                            args.input.display(),
                            col.len()
                        )));
                    }
                    for (i, &x) in col.iter().enumerate() {
                        m.set(i, j, x);
                    }
                }
                m
            }
            None => Matrix::identity(d),
        };
        let spectrum = Spectrum::new(
            file.eigenvalues.clone(),
            file.eigenvalues_raw.clone(),
            vectors,
            file.n,
        );
        let mut base = file;
        base.input = InputMeta {
            path: args.input.display().to_string(),
            format: "json".to_string(),
            digest_fnv1a64: digest,
            n: base.n,
            d: base.d,
        };
        (spectrum, base)
    } else {
        let loaded = read_matrix(&args.input)?;
        let meta = loaded.meta(&args.input);
        let (e, _centered, spectrum, trace) =
            pipeline_spectrum(loaded.matrix, None, DivisorConvention::Population)?;
        let base = SpectrumFile {
            tool_version: TOOL_VERSION.to_string(),
            input: meta,
            divisor: DivisorConvention::Population,
            n: e.n(),
            d: e.d(),
            trace,
            eigenvalues: spectrum.eigenvalues().to_vec(),
            eigenvalues_raw: spectrum.eigenvalues_raw().to_vec(),
            eigenvectors: None,
            calibration: None,
        };
        (spectrum, base)
    };

    // Flags on `auto` defer to the config's zeta block when one is given.
    let zeta_cfg = match &args.config {
        Some(path) => crate::config::RunConfig::load(path)?.zeta,
        None => Default::default(),
    };
    let splice = match (args.k.as_str(), zeta_cfg.k) {
        ("auto", Some(k)) => SpliceIndex::Fixed(k),
        ("auto", None) => {
            let floor_spec = args.noise_floor.to_floor_spec(args.c0);
            let floor = match floor_spec {
                FloorSpec::Theory { c0 } => {
                    spectral_lab::diagnostics::noise_floor_theory(&spectrum, c0)?
                }
                FloorSpec::SplitHalf => {
                    return Err(CliError::config(
                        "--noise-floor split-half needs raw data; use a matrix input or --k <int>",
                    ))
                }
            };
            SpliceIndex::Auto(floor)
        }
        (raw, _) => SpliceIndex::Fixed(raw.parse::<usize>().map_err(|_| {
            CliError::config(format!("--k expects a positive integer or `auto`, got `{raw}`"))
        })?),
    };
    let tail = match (args.beta.as_str(), zeta_cfg.beta) {
        ("auto", Some(b)) => TailExponent::Fixed(b),
        ("auto", None) => TailExponent::Auto,
        (raw, _) => TailExponent::Fixed(raw.parse::<f64>().map_err(|_| {
            CliError::config(format!("--beta expects a real number or `auto`, got `{raw}`"))
        })?),
    };

    let cs = calibrate(&spectrum, splice, tail)?;
    if cs.beta_floored {
        eprintln!(
            "warning: fitted tail exponent was not positive; using a flat tail (beta = 0)"
        );
    }

    if args.dry_run {
        println!("K={} beta={} c={}", cs.k, cs.beta, cs.c);
        return Ok(());
    }

    base.tool_version = TOOL_VERSION.to_string();
    base.eigenvalues = cs.eigenvalues.clone();
    base.calibration = Some(CalibrationBlock {
        method: "zeta_filter".to_string(),
        k: cs.k,
        beta: cs.beta,
        c: cs.c,
        beta_floored: cs.beta_floored,
    });

    match args.format {
        OutputFormat::Json => emit_json(&base, args.output.as_deref()),
        OutputFormat::Csv => {
            let mut out = String::from("mode,eigenvalue\n");
            for (i, l) in base.eigenvalues.iter().enumerate() {
                out.push_str(&format!("{},{l}\n", i + 1));
            }
            match &args.output {
                Some(path) => std::fs::write(path, out).map_err(CliError::from),
                None => {
                    print!("{out}");
                    Ok(())
                }
            }
        }
        OutputFormat::Bin => Err(CliError::config(
            "calibrated spectra support --format json or csv",
        )),
    }
}
