//! `diagnose`: the full spectral diagnostics report for one embedding file,
//! label-aware when a labels file is given.

use super::{parse_k_list, FloorArg, TOOL_VERSION};
use crate::config::RunConfig;
use crate::errors::CliError;
use crate::formats::{emit_json, read_labels, read_matrix, InputMeta};
use clap::Args as ClapArgs;
use serde::Serialize;
use spectral_lab::matrix::{DivisorConvention, EmbeddingSet};
use spectral_lab::report::{diagnose, DiagnosticsConfig, DiagnosticsReport};
use std::path::PathBuf;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Matrix file (CSV or SPL1 binary); falls back to the config's `input`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label file: one non-negative integer per row of the input; falls
    /// back to the config's `labels`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// JSON configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub variance_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub noise_floor: Option<FloorArg>,
    #[arg(long)]
    pub c0: Option<f64>,
    /// Comma-separated subspace sizes for the Davis–Kahan block.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct LabelsMeta {
    path: String,
    digest_fnv1a64: String,
    classes: usize,
}

#[derive(Debug, Serialize)]
struct DiagnoseOutput {
    tool_version: String,
    command: &'static str,
    input: InputMeta,
    labels_input: Option<LabelsMeta>,
    config: DiagnosticsConfig,
    report: DiagnosticsReport,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };

    let mut dcfg = DiagnosticsConfig {
        variance_fraction: args.variance_fraction.unwrap_or(base.variance_fraction),
        tau: args.tau.unwrap_or(base.tau),
        floor: base.noise_floor.to_floor_spec(),
        k_list: base.k_list.clone(),
        divisor: DivisorConvention::Population,
    };
    if let Some(floor_arg) = args.noise_floor {
        let c0 = args.c0.unwrap_or(base.noise_floor.c0);
        dcfg.floor = floor_arg.to_floor_spec(c0);
    } else if let Some(c0) = args.c0 {
        dcfg.floor = spectral_lab::diagnostics::FloorSpec::Theory { c0 };
    }
    if let Some(raw) = &args.k {
        dcfg.k_list = parse_k_list(raw)?;
    }

    let input = args
        .input
        .clone()
        .or_else(|| base.input.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::config("no input: pass --input or set `input` in the config"))?;
    let labels_path = args
        .labels
        .clone()
        .or_else(|| base.labels.as_ref().map(PathBuf::from));

    let loaded = read_matrix(&input)?;
    let meta = loaded.meta(&input);
    let labels_detail = match &labels_path {
        Some(path) => {
            let (labels, digest) = read_labels(path)?;
            Some((path.display().to_string(), digest, labels))
        }
        None => None,
    };
    let e = EmbeddingSet::new(
        loaded.matrix,
        labels_detail.as_ref().map(|(_, _, l)| l.clone()),
    )?;
    let labels_input = labels_detail.map(|(path, digest, _)| LabelsMeta {
        path,
        digest_fnv1a64: digest,
        classes: e.class_count(),
    });

    let report = diagnose(&e, &dcfg)?;
    let out = DiagnoseOutput {
        tool_version: TOOL_VERSION.to_string(),
        command: "diagnose",
        input: meta,
        labels_input,
        config: dcfg,
        report,
    };
    emit_json(&out, args.output.as_deref())
}
