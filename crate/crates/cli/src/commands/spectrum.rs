//! `spectrum`: eigenvalues (and optionally sign-fixed eigenvectors) of the
//! covariance of a matrix file.

use super::{eigenvector_columns, pipeline_spectrum, DivisorArg, OutputFormat, TOOL_VERSION};
use crate::errors::CliError;
use crate::formats::{emit_json, read_matrix, SpectrumFile};
use clap::Args as ClapArgs;
use std::path::PathBuf;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Matrix file (CSV or SPL1 binary).
    #[arg(long)]
    pub input: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Include the eigenvector columns in the output.
    #[arg(long)]
    pub eigenvectors: bool,
    #[arg(long, value_enum, default_value = "population")]
    pub divisor: DivisorArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let loaded = read_matrix(&args.input)?;
    let meta = loaded.meta(&args.input);
    let divisor = args.divisor.to_convention();
    let (e, _centered, spectrum, trace) = pipeline_spectrum(loaded.matrix, None, divisor)?;

    let file = SpectrumFile {
        tool_version: TOOL_VERSION.to_string(),
        input: meta,
        divisor,
        n: e.n(),
        d: e.d(),
        trace,
        eigenvalues: spectrum.eigenvalues().to_vec(),
        eigenvalues_raw: spectrum.eigenvalues_raw().to_vec(),
        eigenvectors: args.eigenvectors.then(|| eigenvector_columns(&spectrum)),
        calibration: None,
    };

    match args.format {
        OutputFormat::Json => emit_json(&file, args.output.as_deref()),
        OutputFormat::Csv => {
            let mut out = String::from("mode,eigenvalue,eigenvalue_raw\n");
            for (i, (l, r)) in file
                .eigenvalues
                .iter()
                .zip(&file.eigenvalues_raw)
                .enumerate()
            {
                out.push_str(&format!("{},{l},{r}\n", i + 1));
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
            "spectrum reports support --format json or csv",
        )),
    }
}
