//! `stability`: subspace rotation between a reference embedding matrix and a
//! test matrix, per leading-k block, against the Davis–Kahan bound built
//! from a split-half noise floor of the test data.

use super::{parse_k_list, pipeline_spectrum, TOOL_VERSION};
use crate::errors::CliError;
use crate::formats::{emit_json, read_matrix, InputMeta};
use clap::Args as ClapArgs;
use serde::Serialize;
use spectral_lab::diagnostics::{davis_kahan_bound, noise_floor_split_half, NoiseFloor};
use spectral_lab::matrix::{principal_angles, DivisorConvention};
use spectral_lab::SpectralError;
use std::path::PathBuf;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Data-rich reference matrix.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Test matrix (typically the data-starved one).
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated subspace sizes.
    #[arg(long, default_value = "1,2,4,8")]
    pub k: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct StabilityRow {
    k: usize,
    /// Largest principal-angle sine between the leading-k subspaces.
    sin_theta: f64,
    /// Eigengap δ_k of the reference spectrum.
    eigengap_ref: f64,
    /// min(1, 2·floor/δ_k).
    dk_bound: f64,
    /// True when the measurement exceeds the bound, which can only happen
    /// when the estimated floor undershoots the true perturbation.
    bound_violated: bool,
}

#[derive(Debug, Serialize)]
struct StabilityOutput {
    tool_version: String,
    command: &'static str,
    ref_input: InputMeta,
    test_input: InputMeta,
    noise_floor: NoiseFloor,
    gap_source: &'static str,
    rows: Vec<StabilityRow>,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let k_list = parse_k_list(&args.k)?;
    let ref_loaded = read_matrix(&args.reference)?;
    let test_loaded = read_matrix(&args.test)?;
    let ref_meta = ref_loaded.meta(&args.reference);
    let test_meta = test_loaded.meta(&args.test);

    if ref_loaded.matrix.cols() != test_loaded.matrix.cols() {
        return Err(SpectralError::Contract(format!(
            "dimension mismatch: reference has D={}, test has D={}",
            ref_loaded.matrix.cols(),
            test_loaded.matrix.cols()
        ))
        .into());
    }

    let (_e_ref, _c_ref, ref_spectrum, _) =
        pipeline_spectrum(ref_loaded.matrix, None, DivisorConvention::Population)?;
    let (_e_test, test_centered, test_spectrum, _) =
        pipeline_spectrum(test_loaded.matrix, None, DivisorConvention::Population)?;

    let floor = noise_floor_split_half(&test_centered)?;

    let d = ref_spectrum.d().min(test_spectrum.d());
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in &k_list {
        if k >= d {
            return Err(SpectralError::Contract(format!(
                "subspace size k={k} out of range [1, {d})"
            ))
            .into());
        }
        let sin_theta = principal_angles(&ref_spectrum, &test_spectrum, k)?.max_sine();
        let eigengap_ref = ref_spectrum.eigengap(k)?;
        let dk_bound = davis_kahan_bound(floor.value, &ref_spectrum, k)?;
        rows.push(StabilityRow {
            k,
            sin_theta,
            eigengap_ref,
            dk_bound,
            bound_violated: sin_theta > dk_bound,
        });
    }

    let out = StabilityOutput {
        tool_version: TOOL_VERSION.to_string(),
        command: "stability",
        ref_input: ref_meta,
        test_input: test_meta,
        noise_floor: floor,
        gap_source: "reference",
        rows,
    };
    emit_json(&out, args.output.as_deref())
}
