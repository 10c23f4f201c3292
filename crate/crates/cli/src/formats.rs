//! File formats: matrix files (CSV and `SPL1` binary), label files, and the
//! spectrum JSON document shared by the `spectrum` and `zeta-filter`
//! commands.
//!
//! Matrix CSV: UTF-8, comma-separated, one sample per row, decimal point,
//! optional single header row (detected by failing to parse as numbers).
//! Floats are written in shortest round-trip form, so a CSV round-trip is
//! value-exact.
//!
//! Matrix binary: magic bytes `SPL1`, little-endian u64 row count,
//! little-endian u64 column count, then rows×cols little-endian IEEE-754
//! f64 in row-major order. Round-trips byte-exactly.

use crate::errors::CliError;
use serde::{Deserialize, Serialize};
use spectral_lab::matrix::{DivisorConvention, Matrix};
use std::fs;
use std::path::Path;

pub const BINARY_MAGIC: &[u8; 4] = b"SPL1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "bin",
        }
    }
}

/// FNV-1a 64-bit digest, hex-encoded; used as the input fingerprint in every
/// report.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Provenance block for one input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputMeta {
    pub path: String,
    pub format: String,
    pub digest_fnv1a64: String,
    pub n: usize,
    pub d: usize,
}

#[derive(Debug)]
pub struct LoadedMatrix {
    pub matrix: Matrix,
    pub format: MatrixFormat,
    pub digest: String,
}

impl LoadedMatrix {
    pub fn meta(&self, path: &Path) -> InputMeta {
        InputMeta {
            path: path.display().to_string(),
            format: self.format.name().to_string(),
            digest_fnv1a64: self.digest.clone(),
            n: self.matrix.rows(),
            d: self.matrix.cols(),
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

/// Read a matrix file, auto-detecting the binary magic.
pub fn read_matrix(path: &Path) -> Result<LoadedMatrix, CliError> {
    let bytes = read_bytes(path)?;
    let digest = fnv1a64_hex(&bytes);
    if bytes.starts_with(BINARY_MAGIC) {
        let matrix = parse_binary(&bytes)
            .map_err(|e| CliError::io(format!("malformed binary matrix {}: {e}", path.display())))?;
        Ok(LoadedMatrix {
            matrix,
            format: MatrixFormat::Binary,
            digest,
        })
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::io(format!("{} is not UTF-8 text", path.display())))?;
        let matrix = parse_csv(text)
            .map_err(|e| CliError::io(format!("malformed CSV matrix {}: {e}", path.display())))?;
        Ok(LoadedMatrix {
            matrix,
            format: MatrixFormat::Csv,
            digest,
        })
    }
}

fn parse_binary(bytes: &[u8]) -> Result<Matrix, String> {
    if bytes.len() < 20 {
        return Err("truncated header".into());
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let want = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(20))
        .ok_or("dimension overflow")?;
    if bytes.len() != want {
        return Err(format!(
            "expected {want} bytes for {rows}x{cols}, found {}",
            bytes.len()
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in bytes[20..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Matrix::from_vec(rows, cols, data).map_err(|e| e.to_string())
}

fn parse_csv(text: &str) -> Result<Matrix, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = trimmed.split(',').map(|f| f.trim().parse()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // A single leading unparsable row is the optional header.
            Err(e) if lineno == 0 => {
                let _ = e;
                continue;
            }
            Err(e) => return Err(format!("line {}: {e}", lineno + 1)),
        }
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(CliError::from)
}

pub fn write_matrix_binary(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(20 + m.rows() * m.cols() * 8);
    bytes.extend_from_slice(BINARY_MAGIC);
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for i in 0..m.rows() {
        for v in m.row(i) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(CliError::from)
}

/// Labels: one non-negative integer per line, optional single header line.
pub fn read_labels(path: &Path) -> Result<(Vec<usize>, String), CliError> {
    let bytes = read_bytes(path)?;
    let digest = fnv1a64_hex(&bytes);
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::io(format!("{} is not UTF-8 text", path.display())))?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(CliError::io(format!(
                    "malformed label file {} line {}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if labels.is_empty() {
        return Err(CliError::io(format!(
            "label file {} has no entries",
            path.display()
        )));
    }
    Ok((labels, digest))
}

/// Calibration provenance attached to a filtered spectrum file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationBlock {
    pub method: String,
    pub k: usize,
    pub beta: f64,
    pub c: f64,
    pub beta_floored: bool,
}

/// The spectrum document written by `spectrum` and `zeta-filter` and read
/// back by `zeta-filter`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub tool_version: String,
    pub input: InputMeta,
    pub divisor: DivisorConvention,
    pub n: usize,
    pub d: usize,
    pub trace: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_raw: Vec<f64>,
    /// Eigenvector columns; omitted unless requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub calibration: Option<CalibrationBlock>,
}

pub fn read_spectrum_file(path: &Path) -> Result<(SpectrumFile, String), CliError> {
    let bytes = read_bytes(path)?;
    let digest = fnv1a64_hex(&bytes);
    let file: SpectrumFile = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::io(format!(
            "malformed spectrum JSON {}: {e}",
            path.display()
        ))
    })?;
    Ok((file, digest))
}

/// True when the file looks like a JSON document rather than a matrix.
pub fn looks_like_json(path: &Path) -> Result<bool, CliError> {
    let bytes = read_bytes(path)?;
    Ok(bytes
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'{'))
}

/// Serialize a JSON value and either write it to `out` or print to stdout.
pub fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("serialization failed: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(CliError::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp(content: &[u8], ext: &str) -> tempfile::TempPath {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content).unwrap();
        f.into_temp_path()
    }

    #[test]
    fn csv_with_and_without_header() {
        let plain = tmp(b"1.0,2.0\n3.0,4.0\n", ".csv");
        let m = read_matrix(Path::new(&*plain)).unwrap();
        assert_eq!(m.matrix.rows(), 2);
        assert_eq!(m.matrix.get(1, 0), 3.0);

        let headered = tmp(b"x,y\n1.0,2.0\n3.0,4.0\n", ".csv");
        let h = read_matrix(Path::new(&*headered)).unwrap();
        assert_eq!(h.matrix.as_slice(), m.matrix.as_slice());
    }

    #[test]
    fn csv_rejects_mid_file_garbage() {
        let bad = tmp(b"1.0,2.0\noops,4.0\n", ".csv");
        let err = read_matrix(Path::new(&*bad)).unwrap_err();
        assert_eq!(err.code, 2);
    }

    #[test]
    fn binary_round_trip_byte_exact() {
        let m = Matrix::from_rows(&[
            vec![1.5, -0.25, f64::MIN_POSITIVE],
            vec![1e300, -1e-300, 0.0],
        ])
        .unwrap();
        let path = tempfile::Builder::new()
            .suffix(".bin")
            .tempfile()
            .unwrap()
            .into_temp_path();
        write_matrix_binary(Path::new(&*path), &m).unwrap();
        let first = std::fs::read(&*path).unwrap();
        let back = read_matrix(Path::new(&*path)).unwrap();
        assert_eq!(back.format, MatrixFormat::Binary);
        assert_eq!(back.matrix.as_slice(), m.as_slice());
        write_matrix_binary(Path::new(&*path), &back.matrix).unwrap();
        assert_eq!(std::fs::read(&*path).unwrap(), first);
    }

    #[test]
    fn csv_round_trip_value_exact() {
        let m = Matrix::from_rows(&[vec![0.1, 2.0 / 3.0], vec![1e-17, 12345.678901234567]])
            .unwrap();
        let path = tempfile::Builder::new()
            .suffix(".csv")
            .tempfile()
            .unwrap()
            .into_temp_path();
        write_matrix_csv(Path::new(&*path), &m).unwrap();
        let back = read_matrix(Path::new(&*path)).unwrap();
        assert_eq!(back.matrix.as_slice(), m.as_slice());
    }

    #[test]
    fn labels_parse_with_header() {
        let f = tmp(b"label\n0\n1\n0\n", ".csv");
        let (labels, _) = read_labels(Path::new(&*f)).unwrap();
        assert_eq!(labels, vec![0, 1, 0]);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(fnv1a64_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a64_hex(b"a"), "af63dc4c8601ec8c");
    }
}
